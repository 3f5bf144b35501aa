#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "synprime/kgram.hpp"
#include "synprime/lstm.hpp"
#include "synprime/vocabulary.hpp"

namespace synprime {

enum class Backend : std::uint32_t { Lstm = 0, KGram = 1, RandomInitLstm = 2 };

std::string_view to_string(Backend backend);

struct LstmHyper {
  int nhid = 100;
  int nlayers = 2;
  int emb_dim = 100;
  double learning_rate = 20.0;
  int bptt_len = 35;
  int epochs = 4;
  std::uint64_t seed = 1;
  std::uint64_t corpus_tokens = 0;  // size of the training slice, recorded for analysis
  int batch_size = 20;
  double init_scale = 0.1;  // standard deviation of the N(0, s^2) weight initialisation
  double clip_norm = 0.25;
  int min_count = 2;

  // Throws DataError on non-positive sizes or rates.
  void validate() const;
  friend bool operator==(const LstmHyper&, const LstmHyper&) = default;
};

struct KGramHyper {
  int order = 2;
  double alpha = 0.1;
  int min_count = 2;
  friend bool operator==(const KGramHyper&, const KGramHyper&) = default;
};

struct Provenance {
  std::string corpus_id;
  std::vector<std::string> adaptations;  // adaptation set ids, oldest first
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

// Complete, independently owned model state. Copies never share storage.
struct ModelSnapshot {
  Backend backend = Backend::Lstm;
  Vocabulary vocab;
  LstmHyper hyper;
  KGramHyper kgram;
  std::variant<LstmParams<float>, KGramModel> params;
  Provenance provenance;

  bool is_lstm() const { return std::holds_alternative<LstmParams<float>>(params); }
  const LstmParams<float>& lstm() const { return std::get<LstmParams<float>>(params); }
  LstmParams<float>& lstm() { return std::get<LstmParams<float>>(params); }
  const KGramModel& kgram_model() const { return std::get<KGramModel>(params); }
  KGramModel& kgram_model() { return std::get<KGramModel>(params); }

  // Throws NumericalError if parameter shapes disagree with the hyperparameters
  // or the vocabulary.
  void check() const;
};

struct TokenSurprisals {
  std::vector<double> bits;  // -log2 p(token_t | tokens_<t)
  std::vector<bool> masked;  // true where the token is out of vocabulary
};

// Column t holds p(. | ids[0..t]); every column sums to one.
Eigen::MatrixXd forward(const ModelSnapshot& snapshot, std::span<const int> ids);

// Surprisal of each token of a sentence, conditioned on a leading <eos>.
TokenSurprisals surprisal(const ModelSnapshot& snapshot, std::span<const std::string> sentence);

// Same as surprisal() for many sentences; LSTM sentences are scored in padded batches.
std::vector<TokenSurprisals> surprisal_batch(const ModelSnapshot& snapshot,
                                             std::span<const Sentence> sentences);

// Mean over unmasked positions; throws DataError if every position is masked.
double mean_surprisal(const TokenSurprisals& ts);

struct EpochReport {
  int epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;       // nats per token
  double validation_bits = 0.0;  // bits per token on the validation stream
};

// Plain SGD with truncated backpropagation through time; the learning rate is
// divided by 4 whenever validation loss fails to improve, and the weights of
// the best validation epoch are returned. The last 5% of sentences (at least one,
// when the corpus has 20 or more) are held out for this.
ModelSnapshot train_lstm(const Corpus& corpus, const LstmHyper& hyper, std::string corpus_id,
                         const std::function<void(const EpochReport&)>& on_epoch = {});

ModelSnapshot train_kgram(const Corpus& corpus, const KGramHyper& hyper, std::string corpus_id);

// Untrained LSTM: weights ~ N(0, init_scale^2), biases zero.
ModelSnapshot random_init(const LstmHyper& hyper, const Vocabulary& vocab, std::uint64_t seed);

// Empty k-gram counts (uniform predictions) over `vocab`.
ModelSnapshot empty_kgram(const KGramHyper& hyper, const Vocabulary& vocab);

struct AdaptConfig {
  double learning_rate = 2.0;
  double clip_norm = 0.25;
  // Weight added per observed n-gram by k-gram adaptation.
  double count_increment = 1.0;
};

// Continues training on `sentences` in order, one SGD step per sentence with the
// hidden state reset at each sentence. k-gram snapshots add the sentences'
// n-gram counts instead. learning_rate == 0 leaves every backend unchanged.
// The input snapshot is never modified.
ModelSnapshot adapt(const ModelSnapshot& snapshot, std::span<const Sentence> sentences,
                    const AdaptConfig& config, const std::string& set_id);

struct GradientCheckOptions {
  double step = 1e-5;
  int samples_per_tensor = 24;
  std::uint64_t seed = 1;
};

// Max over sampled parameters of |analytic - fd| / (|analytic| + |fd| + 1e-12),
// where fd is the central finite difference of the summed sentence NLL. Runs in
// double precision. Each batch entry is a full id sequence scored like adapt().
double gradient_check(const LstmParams<double>& params, std::span<const std::vector<int>> batch,
                      const GradientCheckOptions& options = {});
double gradient_check(const ModelSnapshot& snapshot, std::span<const std::vector<int>> batch,
                      const GradientCheckOptions& options = {});

// Summed NLL (nats) and its gradient for a batch of sentences, each processed from
// a zero state as <eos> w1 .. wn -> w1 .. wn <eos>.
template <typename Scalar>
Scalar sentence_loss_and_gradient(const LstmParams<Scalar>& params,
                                  std::span<const std::vector<int>> batch, int eos_id,
                                  LstmParams<Scalar>& grad);

// Mean surprisal (bits) over a corpus, averaged per sentence then across sentences.
double corpus_mean_surprisal(const ModelSnapshot& snapshot, const Corpus& corpus);

}  // namespace synprime
