#include "toxtrig/triggers.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "toxtrig/errors.hpp"
#include "toxtrig/io.hpp"
#include "toxtrig/random.hpp"

namespace toxtrig {

using nlohmann::json;

std::string_view to_string(ChildScope scope) { return scope == ChildScope::Direct ? "direct" : "descendants"; }

ChildScope parse_child_scope(std::string_view s) {
  if (s == "direct") return ChildScope::Direct;
  if (s == "descendants") return ChildScope::Descendants;
  throw ConfigError("triggers.child_scope", "expected direct or descendants, got " + std::string(s));
}

void TriggerConfig::validate() const {
  if (n < 1) throw ConfigError("triggers.n", "must be >= 1");
}

std::string_view to_string(TriggerLabel label) { return label == TriggerLabel::Trigger ? "trigger" : "nontrigger"; }

namespace {

ToxicityLabel label_of(const LabelMap& labels, const std::string& id) {
  auto it = labels.find(id);
  if (it == labels.end()) throw DataError("comment " + id + " has no toxicity label");
  return it->second;
}

}  // namespace

std::size_t toxic_child_count(const CommentThread& thread, std::string_view id, const LabelMap& labels,
                              ChildScope scope) {
  std::size_t count = 0;
  std::vector<const std::string*> stack;
  for (const auto& c : thread.children_of(id)) stack.push_back(&c);
  while (!stack.empty()) {
    const std::string* c = stack.back();
    stack.pop_back();
    if (label_of(labels, *c) == ToxicityLabel::Toxic) ++count;
    if (scope == ChildScope::Descendants) {
      for (const auto& g : thread.children_of(*c)) stack.push_back(&g);
    }
  }
  return count;
}

std::vector<TriggerCount> label_triggers(std::span<const CommentThread> threads, const LabelMap& labels,
                                         const TriggerConfig& config) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.n);
  std::vector<TriggerCount> out;
  for (const auto& t : threads) {
    // Toxic totals per subtree, accumulated children-first so each member is visited once.
    std::unordered_map<std::string, std::size_t> subtree_toxic;
    std::unordered_map<std::string, std::size_t> in_scope;
    std::vector<std::pair<const std::string*, bool>> stack;
    for (const auto& id : t.top_level) stack.emplace_back(&id, false);
    for (const auto& id : t.orphans) stack.emplace_back(&id, false);
    while (!stack.empty()) {
      auto [id, expanded] = stack.back();
      stack.pop_back();
      const auto& kids = t.children_of(*id);
      if (!expanded) {
        stack.emplace_back(id, true);
        for (const auto& k : kids) stack.emplace_back(&k, false);
        continue;
      }
      std::size_t direct = 0;
      std::size_t below = 0;
      for (const auto& k : kids) {
        const bool toxic = label_of(labels, k) == ToxicityLabel::Toxic;
        direct += toxic;
        below += toxic + subtree_toxic[k];
      }
      subtree_toxic[*id] = below;
      in_scope[*id] = config.child_scope == ChildScope::Direct ? direct : below;
    }
    for (const auto& c : t.members) {
      if (t.is_orphan(c.id) || label_of(labels, c.id) != ToxicityLabel::NonToxic) continue;
      const std::size_t k = in_scope[c.id];
      if (k >= n) out.push_back({c.id, k});
    }
  }
  std::sort(out.begin(), out.end(), [](const TriggerCount& a, const TriggerCount& b) { return a.id < b.id; });
  return out;
}

std::vector<std::string> nontrigger_candidates(std::span<const CommentThread> threads, const LabelMap& labels,
                                               std::span<const TriggerCount> triggers) {
  std::set<std::string_view> trigger_ids;
  for (const auto& t : triggers) trigger_ids.insert(t.id);
  std::vector<std::string> out;
  for (const auto& t : threads) {
    for (const auto& c : t.members) {
      if (t.is_orphan(c.id) || trigger_ids.count(c.id)) continue;
      if (label_of(labels, c.id) == ToxicityLabel::NonToxic) out.push_back(c.id);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> sample_nontriggers(std::span<const std::string> candidates, std::size_t count,
                                            std::uint64_t seed) {
  if (count > candidates.size()) {
    throw DataError("cannot sample " + std::to_string(count) + " non-triggers from " +
                    std::to_string(candidates.size()) + " candidates");
  }
  std::vector<std::string> pool(candidates.begin(), candidates.end());
  std::sort(pool.begin(), pool.end());
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

DatasetSplit make_dataset(std::vector<TriggerExample> triggers, std::vector<TriggerExample> nontriggers,
                          double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw DataError("split ratio must lie strictly between 0 and 1");
  if (triggers.size() < 2 || nontriggers.size() < 2) {
    throw DataError("need at least 2 examples per class, got " + std::to_string(triggers.size()) + " triggers and " +
                    std::to_string(nontriggers.size()) + " non-triggers");
  }
  std::set<std::string> ids;
  for (const auto* group : {&triggers, &nontriggers}) {
    for (const auto& e : *group) {
      if (!ids.insert(e.id).second) throw DataError("example id appears twice: " + e.id);
    }
  }

  DatasetSplit split;
  split.ratio = ratio;
  split.seed = seed;
  Rng rng(seed);
  for (auto* group : {&triggers, &nontriggers}) {
    std::sort(group->begin(), group->end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    rng.shuffle(*group);
    const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(group->size())));
    if (n_train == 0 || n_train == group->size()) {
      throw DataError("split ratio leaves an empty train or test share for a class of " +
                      std::to_string(group->size()));
    }
    for (std::size_t i = 0; i < group->size(); ++i) {
      ((i < n_train) ? split.train : split.test).push_back(std::move((*group)[i]));
    }
  }
  return split;
}

json split_manifest(const DatasetSplit& split) {
  const auto ids = [](const std::vector<TriggerExample>& v, TriggerLabel l) {
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (e.label == l) out.push_back(e.id);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  json j;
  j["seed"] = split.seed;
  j["ratio"] = split.ratio;
  for (const auto& [name, part] : {std::pair{"train", &split.train}, std::pair{"test", &split.test}}) {
    j[name]["trigger"] = ids(*part, TriggerLabel::Trigger);
    j[name]["nontrigger"] = ids(*part, TriggerLabel::NonTrigger);
  }
  return j;
}

std::string trigger_csv(std::span<const TriggerExample> examples) {
  std::vector<const TriggerExample*> sorted;
  for (const auto& e : examples) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
  std::string out = "comment_id,label,toxic_child_count\n";
  for (const auto* e : sorted) {
    out += csv_row({e->id, std::string(to_string(e->label)), std::to_string(e->toxic_children)});
  }
  return out;
}

}  // namespace toxtrig
