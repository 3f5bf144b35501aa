#include "synprime/kgram.hpp"

#include "synprime/error.hpp"

namespace synprime {

KGramModel::KGramModel(int order, double alpha, int vocab_size, int eos_id)
    : order_(order), alpha_(alpha), vocab_size_(vocab_size), eos_id_(eos_id) {
  if (order < 1) throw DataError("k-gram order must be at least 1");
  if (!(alpha > 0.0)) throw DataError("k-gram smoothing alpha must be positive");
  if (vocab_size < 2) throw DataError("k-gram vocabulary too small");
}

KGramModel::Context KGramModel::context_at(std::span<const int> ids, std::size_t pos) const {
  Context ctx;
  const auto width = static_cast<std::size_t>(order_ - 1);
  ctx.reserve(width);
  for (std::size_t k = width; k > 0; --k) {
    ctx.push_back(pos >= k ? ids[pos - k] : eos_id_);
  }
  return ctx;
}

// Totals are re-summed in key order so they depend only on the counts, not on
// the order in which the counts were accumulated or restored.
void KGramModel::refresh_total(const Context& ctx) {
  double total = 0.0;
  for (const auto& [w, c] : counts_[ctx]) total += c;
  totals_[ctx] = total;
}

void KGramModel::add_sentence(std::span<const int> ids, double weight) {
  for (const int id : ids) {
    if (id < 0 || id >= vocab_size_) throw DataError("token id out of vocabulary range");
  }
  for (std::size_t pos = 0; pos <= ids.size(); ++pos) {
    const int next = pos < ids.size() ? ids[pos] : eos_id_;
    const auto ctx = context_at(ids, pos);
    counts_[ctx][next] += weight;
    refresh_total(ctx);
  }
}

void KGramModel::set_count(std::span<const int> ngram, double count) {
  if (ngram.size() != static_cast<std::size_t>(order_)) {
    throw DataError("k-gram entry has the wrong length");
  }
  for (const int id : ngram) {
    if (id < 0 || id >= vocab_size_) throw DataError("k-gram entry id out of vocabulary range");
  }
  const Context ctx(ngram.begin(), ngram.end() - 1);
  counts_[ctx][ngram.back()] = count;
  refresh_total(ctx);
}

double KGramModel::count(std::span<const int> context, int next) const {
  const auto it = counts_.find(Context(context.begin(), context.end()));
  if (it == counts_.end()) return 0.0;
  const auto jt = it->second.find(next);
  return jt == it->second.end() ? 0.0 : jt->second;
}

double KGramModel::context_total(std::span<const int> context) const {
  const auto it = totals_.find(Context(context.begin(), context.end()));
  return it == totals_.end() ? 0.0 : it->second;
}

double KGramModel::probability(std::span<const int> context, int next) const {
  return (count(context, next) + alpha_) / (context_total(context) + alpha_ * vocab_size_);
}

std::vector<double> KGramModel::distribution(std::span<const int> context) const {
  const double denom = context_total(context) + alpha_ * vocab_size_;
  std::vector<double> p(static_cast<std::size_t>(vocab_size_), alpha_ / denom);
  const auto it = counts_.find(Context(context.begin(), context.end()));
  if (it != counts_.end()) {
    for (const auto& [w, c] : it->second) p[static_cast<std::size_t>(w)] = (c + alpha_) / denom;
  }
  return p;
}

}  // namespace synprime
