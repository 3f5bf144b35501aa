#include <doctest.h>

#include <cmath>
#include <numeric>

#include "synprime/error.hpp"
#include "synprime/language_model.hpp"
#include "synprime/random.hpp"

using namespace synprime;

namespace {

Vocabulary numbered_vocab(int n) {
  std::vector<std::string> tokens = {"<unk>", "<eos>"};
  for (int i = 2; i < n; ++i) tokens.push_back("w" + std::to_string(i));
  return Vocabulary::from_tokens(tokens);
}

LstmHyper small_hyper(int nhid, int emb, int layers = 1) {
  LstmHyper h;
  h.nhid = nhid;
  h.emb_dim = emb;
  h.nlayers = layers;
  return h;
}

LstmParams<double> random_params(int vocab, int emb, int nhid, int layers, std::uint64_t seed,
                                 double scale = 0.5) {
  auto p = LstmParams<double>::zeros(vocab, emb, nhid, layers);
  Rng rng(seed);
  for_each_tensor(p, [&](const std::string&, auto& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = scale * rng.normal();
  });
  return p;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Scalar reference LSTM with one layer, written with plain loops.
std::vector<std::vector<double>> reference_forward(const LstmParams<double>& p, const std::vector<int>& ids) {
  const int n = p.hidden_size(), V = p.vocab_size(), E = p.embedding_size();
  const auto& L = p.layers[0];
  std::vector<double> h(n, 0.0), c(n, 0.0);
  std::vector<std::vector<double>> out;
  for (const int id : ids) {
    std::vector<double> z(4 * n);
    for (int r = 0; r < 4 * n; ++r) {
      double s = L.bias(r);
      for (int k = 0; k < E; ++k) s += L.input_weights(r, k) * p.embedding(k, id);
      for (int k = 0; k < n; ++k) s += L.recurrent_weights(r, k) * h[k];
      z[r] = s;
    }
    for (int j = 0; j < n; ++j) {
      const double i = sigmoid(z[j]), f = sigmoid(z[n + j]), g = std::tanh(z[2 * n + j]),
                   o = sigmoid(z[3 * n + j]);
      c[j] = f * c[j] + i * g;
      h[j] = o * std::tanh(c[j]);
    }
    std::vector<double> logits(V);
    double total = 0.0;
    for (int v = 0; v < V; ++v) {
      logits[v] = p.output_bias(v);
      for (int k = 0; k < n; ++k) logits[v] += p.output_weights(v, k) * h[k];
      total += std::exp(logits[v]);
    }
    for (auto& l : logits) l = std::exp(l) / total;
    out.push_back(logits);
  }
  return out;
}

}  // namespace

TEST_CASE("zero parameters predict the uniform distribution") {
  auto snap = random_init(small_hyper(3, 4), numbered_vocab(6), 1);
  set_zero(snap.lstm());
  const std::vector<int> ids = {1, 2, 3, 4};
  const auto dist = forward(snap, ids);
  CHECK(dist.cols() == 4);
  CHECK((dist.array() - 1.0 / 6.0).abs().maxCoeff() < 1e-7);
}

TEST_CASE("uniform model over 256 tokens costs 8 bits per token") {
  auto snap = random_init(small_hyper(4, 4), numbered_vocab(256), 1);
  set_zero(snap.lstm());
  const Sentence s = {"w2", "w100", "w255"};
  const auto ts = surprisal(snap, s);
  REQUIRE(ts.bits.size() == 3);
  for (double b : ts.bits) CHECK(b == doctest::Approx(8.0).epsilon(1e-6));
}

TEST_CASE("forward pass matches a scalar reference") {
  const auto p = random_params(3, 2, 2, 1, 11, 0.8);
  const std::vector<int> ids = {1, 2, 0};
  const auto ref = reference_forward(p, ids);
  const auto got = forward_distributions(p, ids);
  double worst = 0.0;
  for (int t = 0; t < 3; ++t) {
    for (int v = 0; v < 3; ++v) worst = std::max(worst, std::abs(got(v, t) - ref[t][v]));
  }
  CHECK(worst < 1e-10);
  CHECK((got.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("batched surprisal equals one-at-a-time scoring") {
  auto snap = random_init(small_hyper(5, 3, 2), numbered_vocab(9), 4);
  const std::vector<Sentence> sentences = {{"w2", "w3"}, {"w4", "nope", "w5", "w6"}, {"w8"}};
  const auto batch = surprisal_batch(snap, sentences);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto one = surprisal(snap, sentences[i]);
    REQUIRE(one.bits.size() == batch[i].bits.size());
    for (std::size_t t = 0; t < one.bits.size(); ++t) {
      CHECK(one.bits[t] == doctest::Approx(batch[i].bits[t]).epsilon(1e-5));
      CHECK(one.masked[t] == batch[i].masked[t]);
    }
  }
  CHECK(batch[1].masked[1]);
  CHECK_FALSE(batch[1].masked[0]);
}

TEST_CASE("output bias gradient has the softmax closed form") {
  // With zero recurrent weights and embeddings the hidden state stays at zero,
  // so the model is a softmax over the output bias.
  auto p = LstmParams<double>::zeros(5, 2, 3, 1);
  p.output_bias << 0.3, -0.2, 1.1, 0.0, -0.7;
  const std::vector<std::vector<int>> batch = {{2, 3, 2}};
  auto grad = LstmParams<double>::zeros(5, 2, 3, 1);
  const double loss = sentence_loss_and_gradient(p, std::span<const std::vector<int>>(batch), 1, grad);

  Eigen::VectorXd q = p.output_bias.array().exp();
  q /= q.sum();
  // Targets: 2, 3, 2, <eos>.
  Eigen::VectorXd expected = 4.0 * q;
  expected(2) -= 2.0;
  expected(3) -= 1.0;
  expected(1) -= 1.0;
  CHECK((grad.output_bias - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(loss == doctest::Approx(-(2 * std::log(q(2)) + std::log(q(3)) + std::log(q(1)))).epsilon(1e-12));
  CHECK(grad.output_weights.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("unused embeddings receive no gradient") {
  const auto p = random_params(7, 3, 4, 2, 5);
  const std::vector<std::vector<int>> batch = {{2, 3}};
  auto grad = LstmParams<double>::zeros(7, 3, 4, 2);
  sentence_loss_and_gradient(p, std::span<const std::vector<int>>(batch), 1, grad);
  for (int unused : {0, 4, 5, 6}) CHECK(grad.embedding.col(unused).cwiseAbs().maxCoeff() == 0.0);
  CHECK(grad.embedding.col(2).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("analytic gradients agree with finite differences") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto p = random_params(12, 6, 8, 2, seed, 0.4);
    const std::vector<std::vector<int>> batch = {{2, 5, 7, 3, 9}, {4, 11}, {10, 10, 6}};
    GradientCheckOptions opt;
    opt.seed = seed;
    CHECK(gradient_check(p, batch, opt) < 1e-4);
  }
}

TEST_CASE("random initialisation has the requested spread") {
  LstmHyper h = small_hyper(40, 30);
  h.init_scale = 0.1;
  const auto snap = random_init(h, numbered_vocab(50), 8);
  double sum = 0, sq = 0;
  std::size_t n = 0;
  for_each_tensor(snap.lstm(), [&](const std::string& name, const auto& t) {
    if (name.ends_with("bias")) {
      CHECK(t.cwiseAbs().maxCoeff() == 0.0f);
      return;
    }
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      sum += t.data()[i];
      sq += double(t.data()[i]) * t.data()[i];
      ++n;
    }
  });
  const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
  CHECK(std::abs(sd - 0.1) < 0.005);
  CHECK(random_init(h, numbered_vocab(50), 8).lstm().embedding == snap.lstm().embedding);
}

TEST_CASE("adaptation with zero learning rate changes nothing") {
  const auto snap = random_init(small_hyper(6, 5), numbered_vocab(10), 3);
  const std::vector<Sentence> set = {{"w2", "w3", "w4"}, {"w5", "w6"}};
  AdaptConfig cfg;
  cfg.learning_rate = 0.0;
  const auto out = adapt(snap, set, cfg, "set-a");
  CHECK(out.lstm().output_weights == snap.lstm().output_weights);
  CHECK(out.lstm().layers[0].recurrent_weights == snap.lstm().layers[0].recurrent_weights);
  CHECK(out.provenance.adaptations == std::vector<std::string>{"set-a"});
  CHECK(snap.provenance.adaptations.empty());
}

TEST_CASE("adaptation lowers surprisal of the adaptation sentences") {
  const auto snap = random_init(small_hyper(8, 6), numbered_vocab(10), 3);
  const std::vector<Sentence> set(10, Sentence{"w2", "w3", "w4", "w5"});
  const double before = mean_surprisal(surprisal(snap, set[0]));
  const auto out = adapt(snap, set, {}, "set");
  CHECK(mean_surprisal(surprisal(out, set[0])) < before);
  // The source snapshot is untouched.
  CHECK(mean_surprisal(surprisal(snap, set[0])) == before);
}

TEST_CASE("training reduces loss and zero epochs return the initialisation") {
  Corpus corpus;
  Rng rng(2);
  const std::vector<std::string> nouns = {"cat", "dog", "bird"}, verbs = {"saw", "chased"};
  for (int i = 0; i < 400; ++i) {
    corpus.push_back({"the", nouns[rng.index(3)], verbs[rng.index(2)], "the", nouns[rng.index(3)], "."});
  }
  LstmHyper h = small_hyper(16, 16);
  h.epochs = 3;
  h.bptt_len = 10;
  h.batch_size = 8;
  h.learning_rate = 1.0;
  std::vector<EpochReport> reports;
  const auto model = train_lstm(corpus, h, "toy", [&](const EpochReport& r) { reports.push_back(r); });
  REQUIRE(reports.size() == 3);
  CHECK(reports.back().train_loss < reports.front().train_loss);
  CHECK(reports.back().validation_bits < std::log2(model.vocab.size()));

  h.epochs = 0;
  const auto init = train_lstm(corpus, h, "toy");
  const auto expected = random_init(h, init.vocab, h.seed);
  CHECK(init.lstm().embedding == expected.lstm().embedding);
  CHECK(init.lstm().output_weights == expected.lstm().output_weights);
}

TEST_CASE("bad inputs are reported") {
  LstmHyper h = small_hyper(0, 4);
  CHECK_THROWS_AS(h.validate(), DataError);
  const auto snap = random_init(small_hyper(3, 3), numbered_vocab(5), 1);
  CHECK_THROWS_AS(adapt(snap, std::vector<Sentence>{}, {}, "empty"), DataError);
  const Sentence unknown = {"zzz"};
  CHECK_THROWS_AS(mean_surprisal(surprisal(snap, unknown)), DataError);
}
