#include "synprime/priming.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "synprime/checkpoint.hpp"
#include "synprime/error.hpp"

namespace synprime {

std::vector<StimulusList> to_stimuli(const std::vector<ExperimentList>& lists) {
  std::vector<StimulusList> out;
  for (const auto& list : lists) {
    StimulusList s;
    s.list_id = list.list_id;
    for (const auto st : kAllStructures) {
      for (const auto& g : list.adaptation[index_of(st)]) s.adaptation[index_of(st)].push_back(g.tokens);
      for (const auto& g : list.test[index_of(st)]) {
        s.test[index_of(st)].push_back({g.sentence_id, g.tokens});
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<StimulusList> to_stimuli(const std::vector<ListRow>& rows) {
  std::map<int, StimulusList> by_id;
  for (const auto& row : rows) {
    auto& s = by_id[row.list_id];
    s.list_id = row.list_id;
    if (row.role == ListRole::Adaptation) {
      s.adaptation[index_of(row.structure)].push_back(row.tokens);
    } else {
      s.test[index_of(row.structure)].push_back({row.sentence_id, row.tokens});
    }
  }
  std::vector<StimulusList> out;
  for (auto& [id, s] : by_id) {
    for (const auto st : kAllStructures) {
      if (s.adaptation[index_of(st)].empty() || s.test[index_of(st)].empty()) {
        throw DataError("list " + std::to_string(id) + " has no adaptation or test sentences for " +
                        std::string(name(st)));
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

auto record_key(const SurprisalRecord& r) {
  return std::tie(r.model_id, r.list_id, r.adapt_structure, r.test_structure, r.sentence_id);
}

using CellKey = std::tuple<std::string, int, StructureId>;

// Runs f(i) for i in [0, n) on up to `workers` threads; rethrows the first failure.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& f) {
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < std::min(threads, n); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

// Mean surprisal of every test sentence of a list; nullopt marks excluded sentences.
using ListScores = std::array<std::vector<std::optional<double>>, kNumStructures>;

ListScores score_list(const ModelSnapshot& model, const StimulusList& list) {
  std::vector<Sentence> flat;
  for (const auto st : kAllStructures) {
    for (const auto& t : list.test[index_of(st)]) flat.push_back(t.tokens);
  }
  const auto scored = surprisal_batch(model, flat);
  ListScores out;
  std::size_t k = 0;
  for (const auto st : kAllStructures) {
    for (std::size_t i = 0; i < list.test[index_of(st)].size(); ++i, ++k) {
      const auto& ts = scored[k];
      const bool any = std::find(ts.masked.begin(), ts.masked.end(), false) != ts.masked.end();
      out[index_of(st)].push_back(any ? std::optional(mean_surprisal(ts)) : std::nullopt);
    }
  }
  return out;
}

GridResult complete_grid(const ExperimentPlan& plan, std::vector<SurprisalRecord> existing,
                         bool append_to_output) {
  if (plan.models.empty()) throw DataError("experiment plan has no models");
  if (plan.lists.empty()) throw DataError("experiment plan has no lists");
  std::set<std::string> model_ids;
  for (const auto& m : plan.models) {
    if (!model_ids.insert(m.id).second) throw DataError("duplicate model id '" + m.id + "'");
  }
  std::map<int, const StimulusList*> lists;
  for (const auto& l : plan.lists) {
    if (!lists.emplace(l.list_id, &l).second) {
      throw DataError("duplicate list id " + std::to_string(l.list_id));
    }
  }

  // Existing records grouped by cell.
  std::map<CellKey, std::vector<SurprisalRecord>> done;
  for (auto& r : existing) {
    if (!model_ids.contains(r.model_id)) {
      throw DataError("records file refers to model '" + r.model_id + "' which is not in the plan");
    }
    if (!lists.contains(r.list_id)) {
      throw DataError("records file refers to list " + std::to_string(r.list_id) +
                      " which is not in the plan");
    }
    done[{r.model_id, r.list_id, r.adapt_structure}].push_back(std::move(r));
  }
  const auto list_size = [&](int list_id) {
    std::size_t n = 0;
    for (const auto& t : lists.at(list_id)->test) n += t.size();
    return n;
  };

  // (model, list) pairs whose cells are all present with every test sentence need no work.
  std::vector<std::pair<std::size_t, int>> pending_pairs;
  for (std::size_t m = 0; m < plan.models.size(); ++m) {
    for (const auto& [list_id, list] : lists) {
      bool complete = true;
      for (const auto st : kAllStructures) {
        const auto it = done.find({plan.models[m].id, list_id, st});
        complete = complete && it != done.end() && it->second.size() == list_size(list_id);
      }
      if (!complete) pending_pairs.emplace_back(m, list_id);
    }
  }

  std::vector<std::shared_ptr<const ModelSnapshot>> snapshots(plan.models.size());
  {
    std::set<std::size_t> needed;
    for (const auto& [m, l] : pending_pairs) needed.insert(m);
    const std::vector<std::size_t> order(needed.begin(), needed.end());
    parallel_for(order.size(), plan.workers, [&](std::size_t i) {
      const auto& pm = plan.models[order[i]];
      snapshots[order[i]] = pm.snapshot ? pm.snapshot
                                        : std::make_shared<const ModelSnapshot>(load_checkpoint(pm.checkpoint));
    });
  }

  std::vector<ListScores> pre(pending_pairs.size());
  parallel_for(pending_pairs.size(), plan.workers, [&](std::size_t i) {
    const auto& [m, l] = pending_pairs[i];
    pre[i] = score_list(*snapshots[m], *lists.at(l));
  });

  GridResult result;
  for (std::size_t i = 0; i < pending_pairs.size(); ++i) {
    const auto& [m, l] = pending_pairs[i];
    for (const auto st : kAllStructures) {
      const auto& scores = pre[i][index_of(st)];
      for (std::size_t k = 0; k < scores.size(); ++k) {
        if (!scores[k]) {
          result.excluded.push_back("model " + plan.models[m].id + ", list " + std::to_string(l) + ", " +
                                    std::string(name(st)) + " sentence " +
                                    std::to_string(lists.at(l)->test[index_of(st)][k].sentence_id) +
                                    ": every token is unknown");
        }
      }
    }
  }

  struct Cell {
    std::size_t pair;
    StructureId adapt;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < pending_pairs.size(); ++i) {
    const auto& [m, l] = pending_pairs[i];
    std::size_t scorable = 0;
    for (const auto& s : pre[i]) scorable += static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](auto& v) { return v.has_value(); }));
    for (const auto st : kAllStructures) {
      const auto it = done.find({plan.models[m].id, l, st});
      if (it != done.end() && it->second.size() == scorable) continue;
      if (it != done.end()) done.erase(it);
      cells.push_back({i, st});
    }
  }

  std::ofstream sink;
  std::mutex sink_mutex;
  if (append_to_output && !plan.output.empty()) {
    if (plan.output.has_parent_path()) std::filesystem::create_directories(plan.output.parent_path());
    std::vector<SurprisalRecord> kept;
    for (const auto& [key, recs] : done) kept.insert(kept.end(), recs.begin(), recs.end());
    write_records_file(plan.output, kept);
    sink.open(plan.output, std::ios::app);
    if (!sink) throw DataError("cannot append to " + plan.output.string());
  }

  std::vector<std::vector<SurprisalRecord>> cell_records(cells.size());
  parallel_for(cells.size(), plan.workers, [&](std::size_t c) {
    const auto& cell = cells[c];
    const auto& [m, l] = pending_pairs[cell.pair];
    const auto& list = *lists.at(l);
    const std::string set_id = "list" + std::to_string(l) + "/" + std::string(name(cell.adapt));
    const ModelSnapshot adapted =
        adapt(*snapshots[m], list.adaptation[index_of(cell.adapt)], plan.adapt, set_id);
    const ListScores post = score_list(adapted, list);
    auto& out = cell_records[c];
    for (const auto test : kAllStructures) {
      const auto& before = pre[cell.pair][index_of(test)];
      const auto& after = post[index_of(test)];
      for (std::size_t k = 0; k < before.size(); ++k) {
        if (!before[k]) continue;
        out.push_back({plan.models[m].id, cell.adapt, test, l,
                       list.test[index_of(test)][k].sentence_id, *before[k], *after[k]});
      }
    }
    if (sink.is_open()) {
      std::ostringstream text;
      write_records(text, out);
      std::string body = text.str();
      // Skip the schema and header lines; the file already has them.
      for (int skip = 0; skip < 2; ++skip) body.erase(0, body.find('\n') + 1);
      std::lock_guard lock(sink_mutex);
      sink << body;
      sink.flush();
    }
  });
  sink.close();

  for (auto& [key, recs] : done) {
    result.records.insert(result.records.end(), recs.begin(), recs.end());
  }
  for (auto& recs : cell_records) result.records.insert(result.records.end(), recs.begin(), recs.end());
  sort_records(result.records);
  result.cells_computed = cells.size();
  if (!plan.output.empty()) write_records_file(plan.output, result.records);
  return result;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

template <typename T>
T parse_number(const std::string& text, std::size_t line_no) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw DataError("records line " + std::to_string(line_no) + ": bad number '" + text + "'");
  }
  return value;
}

constexpr std::string_view kRecordsHeader =
    "model_id\tadapt_structure\ttest_structure\tlist_id\tsentence_id\tsurp_pre\tsurp_post";

}  // namespace

GridResult run_grid(const ExperimentPlan& plan) { return complete_grid(plan, {}, true); }

GridResult resume_grid(const ExperimentPlan& plan) {
  std::vector<SurprisalRecord> existing;
  if (!plan.output.empty() && std::filesystem::exists(plan.output) &&
      std::filesystem::file_size(plan.output) > 0) {
    existing = read_records_file(plan.output);
  }
  return complete_grid(plan, std::move(existing), true);
}

void sort_records(std::vector<SurprisalRecord>& records) {
  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return record_key(a) < record_key(b); });
}

void write_records(std::ostream& out, const std::vector<SurprisalRecord>& records) {
  out << kRecordsSchema << '\n' << kRecordsHeader << '\n';
  for (const auto& r : records) {
    out << r.model_id << '\t' << name(r.adapt_structure) << '\t' << name(r.test_structure) << '\t'
        << r.list_id << '\t' << r.sentence_id << '\t' << format_double(r.surp_pre) << '\t'
        << format_double(r.surp_post) << '\n';
  }
}

void write_records_file(const std::filesystem::path& path, std::vector<SurprisalRecord> records) {
  sort_records(records);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    write_records(out, records);
    if (!out) throw DataError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<SurprisalRecord> read_records(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("records file is empty");
  if (line != kRecordsSchema) {
    throw DataError("records schema mismatch: expected '" + std::string(kRecordsSchema) + "', found '" +
                    line + "'");
  }
  if (!std::getline(in, line) || line != kRecordsHeader) throw DataError("records file has a bad header");
  std::vector<SurprisalRecord> out;
  std::size_t line_no = 2;
  std::set<std::tuple<std::string, int, StructureId, StructureId, int>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    if (f.size() != 7) {
      throw DataError("records line " + std::to_string(line_no) + ": expected 7 fields, found " +
                      std::to_string(f.size()));
    }
    SurprisalRecord r;
    r.model_id = f[0];
    const auto adapt = parse_structure(f[1]);
    const auto test = parse_structure(f[2]);
    if (!adapt || !test) throw DataError("records line " + std::to_string(line_no) + ": unknown structure");
    r.adapt_structure = *adapt;
    r.test_structure = *test;
    r.list_id = parse_number<int>(f[3], line_no);
    r.sentence_id = parse_number<int>(f[4], line_no);
    r.surp_pre = parse_number<double>(f[5], line_no);
    r.surp_post = parse_number<double>(f[6], line_no);
    if (!(r.surp_pre >= 0.0) || !(r.surp_post >= 0.0)) {
      throw DataError("records line " + std::to_string(line_no) + ": negative surprisal");
    }
    if (!seen.insert({r.model_id, r.list_id, r.adapt_structure, r.test_structure, r.sentence_id}).second) {
      throw DataError("records line " + std::to_string(line_no) + ": duplicate record");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SurprisalRecord> read_records_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open records file " + path.string());
  try {
    return read_records(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace synprime
