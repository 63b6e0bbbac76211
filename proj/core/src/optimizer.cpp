#include "bandit/optimizer.hpp"

#include <algorithm>

#include "bandit/errors.hpp"
#include "bandit/parallel.hpp"
#include "bandit/preference.hpp"

namespace bandit {

namespace {

struct Ranked {
  std::size_t global = 0;
  std::size_t bandit = 0;
  std::size_t local = 0;
  double rho = 0.0;
};

Ranked best_remaining(const Instance& instance, const Tableau& tableau, std::size_t k, OpCounter& selection) {
  std::vector<Candidate> candidates;
  candidates.reserve(tableau.remaining().size());
  for (std::size_t j : tableau.remaining())
    candidates.push_back({instance.global_id(k, j), tableau.reward(j), tableau.slack(j)});
  const BestState best = argbest(candidates, instance.hypothesis(), selection);
  return Ranked{best.id, k, tableau.remaining()[best.index], best.stats.rho};
}

// Ranked list kept in decreasing preference; the scan stops at the first
// entry the newcomer beats.
void insert_ranked(std::vector<Ranked>& ranked, const Ranked& entry, OpCounter& selection) {
  auto pos = ranked.begin();
  for (; pos != ranked.end(); ++pos) {
    ++selection.comparisons;
    if (ranks_before(entry.rho, entry.global, pos->rho, pos->global)) break;
  }
  ranked.insert(pos, entry);
}

double finalized_ratio(const Tableau& tableau, std::size_t i, Hypothesis h) {
  OpCounter scratch;
  return categorize_slack(tableau.reward(i), tableau.slack(i), h, scratch).rho;
}

std::vector<Tableau> fresh_tableaus(const Instance& instance, OpCounter& counter) {
  std::vector<Tableau> tableaus;
  tableaus.reserve(instance.num_bandits());
  for (std::size_t k = 0; k < instance.num_bandits(); ++k) {
    tableaus.emplace_back(instance.chain(k), counter, /*track_slack=*/true);
    tableaus.back().set_bandit_index(k);
  }
  return tableaus;
}

Labeling complete_labeling(const Instance& instance, std::vector<std::size_t> order) {
  std::vector<bool> used(instance.num_states(), false);
  for (std::size_t g : order) used[g] = true;
  for (std::size_t g = 0; g < instance.num_states(); ++g)
    if (!used[g]) order.push_back(g);
  return Labeling::from_order(order);
}

}  // namespace

OptimalLabeling optimize(const Instance& instance, OpCounter& counter) {
  OptimizerCounts counts;
  std::vector<Tableau> tableaus = fresh_tableaus(instance, counts.triangularizer);
  const Hypothesis h = instance.hypothesis();

  std::vector<Ranked> ranked;
  ranked.reserve(instance.num_bandits());
  for (std::size_t k = 0; k < instance.num_bandits(); ++k)
    insert_ranked(ranked, best_remaining(instance, tableaus[k], k, counts.selection), counts.selection);

  std::vector<std::size_t> order;
  std::vector<std::optional<double>> rho_final(instance.num_states());
  while (true) {
    const Ranked chosen = ranked.front();
    ranked.erase(ranked.begin());
    order.push_back(chosen.global);

    Tableau& tableau = tableaus[chosen.bandit];
    tableau.finalize_state(chosen.local, counts.triangularizer);
    rho_final[chosen.global] = finalized_ratio(tableau, chosen.local, h);

    if (tableau.complete()) break;
    insert_ranked(ranked, best_remaining(instance, tableau, chosen.bandit, counts.selection), counts.selection);
  }

  const std::size_t stop_label = order.size();
  counter += counts.triangularizer;
  counter += counts.selection;
  return OptimalLabeling{complete_labeling(instance, std::move(order)), stop_label, std::move(rho_final),
                         std::move(tableaus), counts};
}

OptimalLabeling optimize_two_phase(const Instance& instance, OpCounter& counter, bool parallel) {
  const std::size_t K = instance.num_bandits();
  const Hypothesis h = instance.hypothesis();

  // Phase one: each bandit on its own.
  std::vector<std::optional<Tableau>> slots(K);
  std::vector<std::vector<Ranked>> sequences(K);
  std::vector<OptimizerCounts> per_bandit(K);
  parallel_for(
      K,
      [&](std::size_t k) {
        OptimizerCounts& c = per_bandit[k];
        Tableau tableau(instance.chain(k), c.triangularizer, /*track_slack=*/true);
        tableau.set_bandit_index(k);
        while (!tableau.complete()) {
          Ranked best = best_remaining(instance, tableau, k, c.selection);
          tableau.finalize_state(best.local, c.triangularizer);
          sequences[k].push_back(best);
        }
        slots[k].emplace(std::move(tableau));
      },
      parallel);

  OptimizerCounts counts;
  for (const auto& c : per_bandit) {
    counts.triangularizer += c.triangularizer;
    counts.selection += c.selection;
  }

  // Phase two: ratios on finalized data, merged across bandits. Each bandit's
  // own order is kept.
  std::vector<std::optional<double>> rho_final(instance.num_states());
  for (std::size_t k = 0; k < K; ++k) {
    for (Ranked& r : sequences[k]) {
      r.rho = categorize_slack(slots[k]->reward(r.local), slots[k]->slack(r.local), h, counts.selection).rho;
      rho_final[r.global] = r.rho;
    }
  }
  std::vector<std::size_t> head(K, 0);
  std::vector<std::size_t> order;
  order.reserve(instance.num_states());
  while (order.size() < instance.num_states()) {
    std::optional<std::size_t> pick;
    for (std::size_t k = 0; k < K; ++k) {
      if (head[k] >= sequences[k].size()) continue;
      if (!pick) {
        pick = k;
        continue;
      }
      const Ranked& a = sequences[k][head[k]];
      const Ranked& b = sequences[*pick][head[*pick]];
      ++counts.selection.comparisons;
      if (ranks_before(a.rho, a.global, b.rho, b.global)) pick = k;
    }
    order.push_back(sequences[*pick][head[*pick]].global);
    ++head[*pick];
  }

  std::vector<Tableau> tableaus;
  tableaus.reserve(K);
  for (auto& slot : slots) tableaus.push_back(std::move(*slot));

  counter += counts.triangularizer;
  counter += counts.selection;
  return OptimalLabeling{Labeling::from_order(order), instance.num_states(), std::move(rho_final),
                         std::move(tableaus), counts};
}

double optimizer_arithmetic_bound(const Instance& instance) {
  double sum_sq = 0.0;
  for (const auto& chain : instance.chains()) sum_sq += static_cast<double>(chain.size() * chain.size());
  return 0.5 * sum_sq + 0.5 * static_cast<double>(instance.num_states());
}

double optimizer_comparison_bound(const Instance& instance) {
  double sum_sq = 0.0;
  for (const auto& chain : instance.chains()) sum_sq += static_cast<double>(chain.size() * chain.size());
  const auto K = static_cast<double>(instance.num_bandits());
  return 0.5 * sum_sq + static_cast<double>(instance.num_states()) * K + K * K;
}

}  // namespace bandit
