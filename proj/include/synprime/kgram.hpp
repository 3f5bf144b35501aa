#pragma once

#include <map>
#include <span>
#include <vector>

namespace synprime {

// Add-alpha smoothed k-gram counts:
//   p(w | ctx) = (count(ctx, w) + alpha) / (count(ctx) + alpha * V)
// with ctx the previous order-1 ids. Each sentence is padded with order-1 <eos>
// ids on the left and one <eos> on the right before counting.
class KGramModel {
 public:
  using Context = std::vector<int>;

  KGramModel() = default;
  KGramModel(int order, double alpha, int vocab_size, int eos_id);

  void add_sentence(std::span<const int> ids, double weight = 1.0);
  // Sets count(ngram) directly; ngram holds the context followed by the next id.
  void set_count(std::span<const int> ngram, double count);

  double count(std::span<const int> context, int next) const;
  double context_total(std::span<const int> context) const;
  double probability(std::span<const int> context, int next) const;

  // Conditional probability of every id given the context.
  std::vector<double> distribution(std::span<const int> context) const;

  // Padded context preceding position `pos` of `ids` (0-based).
  Context context_at(std::span<const int> ids, std::size_t pos) const;

  int order() const { return order_; }
  double alpha() const { return alpha_; }
  int vocab_size() const { return vocab_size_; }
  int eos_id() const { return eos_id_; }
  const std::map<Context, std::map<int, double>>& table() const { return counts_; }

  friend bool operator==(const KGramModel&, const KGramModel&) = default;

 private:
  void refresh_total(const Context& ctx);

  int order_ = 2;
  double alpha_ = 0.1;
  int vocab_size_ = 0;
  int eos_id_ = 1;
  std::map<Context, std::map<int, double>> counts_;
  std::map<Context, double> totals_;
};

}  // namespace synprime
