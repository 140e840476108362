// engine.hpp
//
// One trial of an active multi-hypothesis test. Four policies share the same
// machinery:
//
//   Greedy    - samples the action with the largest divergence between the
//               champion and its closest rival; GLR stopping.
//   TaS       - C-Tracking toward w*(champion; all others); GLR stopping.
//   StopElim  - TaS sampling; stops once the champion's active-opponent set
//               has been emptied by elimination.
//   FullElim  - C-Tracking toward w*(champion; active opponents) with
//               elimination-based stopping.
//
// The log-likelihood ratio Z_t(h, g) is never stored; it is always read as
// L_t(h) - L_t(g).
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "elimtas/hypothesis_set.hpp"
#include "elimtas/model.hpp"
#include "elimtas/oracle.hpp"
#include "elimtas/rng.hpp"

namespace elimtas {

enum class PolicyKind { kGreedy = 0, kTaS = 1, kStopElim = 2, kFullElim = 3 };

std::string_view policy_name(PolicyKind kind);
PolicyKind parse_policy(std::string_view name);
std::vector<PolicyKind> all_policies();

constexpr bool uses_elimination(PolicyKind kind) {
    return kind == PolicyKind::kStopElim || kind == PolicyKind::kFullElim;
}

// log(K - 1): union-bound offset over the K - 1 opponents.
double default_threshold_offset(std::size_t num_hypotheses);

struct PolicyConfig {
    PolicyKind kind = PolicyKind::kFullElim;
    double delta = 0.1;
    double alpha = 1.0;
    double b = 2.0;
    double c = 0.0;
    std::uint64_t max_steps = 1'000'000;

    // Defaults with c = log(K - 1) for the given environment.
    static PolicyConfig defaults(const Environment& env, PolicyKind kind, double delta,
                                 double alpha = 1.0);

    // Throws std::invalid_argument unless 0 < delta < 1, 0 < alpha <= 1,
    // b > 0, c finite and max_steps >= 1.
    void validate() const;
};

struct Thresholds {
    double stop = 0.0;
    double elim = 0.0;
};

// beta_stop = log(1/delta) + b log t + c; beta_elim = alpha log(1/delta) + b log t + c.
Thresholds thresholds(std::uint64_t t, const PolicyConfig& cfg);

// Per-trial mutable record.
class TrialState {
public:
    explicit TrialState(const Environment& env);

    std::uint64_t t() const { return t_; }
    HypothesisIndex champion() const { return champion_; }
    std::span<const std::uint64_t> counts() const { return counts_; }
    std::span<const double> loglik() const { return loglik_; }
    // Cumulative sum of the raw tracking targets u(0), ..., u(t-1).
    std::span<const double> target() const { return target_; }
    // Cumulative sum of the exploration-mixed targets actually tracked.
    std::span<const double> tracked_target() const { return tracked_; }
    HypothesisSet active(HypothesisIndex i) const { return active_.at(i); }
    const Environment& environment() const { return *env_; }

    // Adds log_density(a, h, o) to every L(h), counts the pull, advances t
    // and recomputes the champion (lowest index on ties).
    void update_likelihoods(ActionIndex a, double observation);

    // Z_t(h, g) = L_t(h) - L_t(g).
    double llr(HypothesisIndex h, HypothesisIndex g) const;

    // C-Tracking step. Accumulates `target_now` into the cumulative target
    // (mixed with eps_t = 1 / (2 sqrt(|A|^2 + t)) of uniform mass for the
    // tracked copy) and returns arg max_a (tracked_a - N_a), lowest index
    // on ties.
    ActionIndex ctrack_select(const Allocation& target_now);

    // Removes from the champion's active set every g with
    // Z_t(champion, g) >= beta_elim(t). Other candidates' sets are untouched.
    HypothesisSet eliminate(const PolicyConfig& cfg);

    // Rival = arg min_{g != champion} Z(champion, g); returns
    // arg max_a d_a(champion, rival). Action 0 before the first observation.
    ActionIndex greedy_select() const;

    // min_{g in set} Z_t(champion, g); +inf for an empty set.
    double min_llr_against(HypothesisSet opponents) const;

private:
    const Environment* env_;
    std::uint64_t t_ = 0;
    HypothesisIndex champion_ = 0;
    std::vector<std::uint64_t> counts_;
    std::vector<double> loglik_;
    std::vector<double> target_;
    std::vector<double> tracked_;
    std::vector<HypothesisSet> active_;
};

struct EliminationEvent {
    std::uint64_t t = 0;
    HypothesisIndex champion = 0;
    std::vector<HypothesisIndex> removed;
};

// Per-round record of an elimination-policy trial. Rates are NaN when the
// champion's active set is empty (the stopping round).
struct DiagnosticsTrace {
    std::size_t num_actions = 0;
    std::vector<std::uint64_t> t;
    std::vector<HypothesisIndex> champion;
    std::vector<std::vector<HypothesisIndex>> active_set;   // G_t(champion) after elimination
    std::vector<std::vector<double>> alloc;                 // N(t) / t
    std::vector<double> min_z;          // min Z_t(champion, g) over G before this round's eliminations
    std::vector<double> beta_elim;
    std::vector<double> oracle_rate;    // D*(champion; G_t(champion))
    std::vector<double> empirical_rate; // f_{G_t}(N(t) / t)
    std::vector<double> target_rate;    // f_{G_t}(average raw target)
    std::vector<double> lipschitz;      // max_{g in G_t} max_a d_a(champion, g)
    std::vector<EliminationEvent> events;

    std::size_t rounds() const { return t.size(); }
};

struct TrialResult {
    std::uint64_t tau = 0;
    HypothesisIndex recommendation = 0;
    bool correct = false;
    bool timed_out = false;
    std::optional<DiagnosticsTrace> diagnostics;
};

// Step-wise trial driver. run_trial() is the one-shot wrapper.
class Trial {
public:
    Trial(const Environment& env, HypothesisIndex true_h, const PolicyConfig& cfg,
          std::uint64_t seed, bool record_diagnostics = false);

    // Executes one round. Returns true once the trial has stopped or hit
    // max_steps; further calls are no-ops.
    bool step();
    bool finished() const { return finished_; }
    const TrialState& state() const { return state_; }
    // The allocation tracked in the most recent round (empty for Greedy).
    const Allocation& last_target() const { return last_target_; }

    TrialResult result() const;
    TrialResult take_result();

private:
    // Opponents used to compute the tracking target for the current champion.
    HypothesisSet sampling_opponents() const;
    Allocation tracking_target(HypothesisSet opponents);
    bool stop_rule_met();
    void record_round(HypothesisSet before, HypothesisSet removed);

    const Environment* env_;
    HypothesisIndex true_h_;
    PolicyConfig cfg_;
    RandomStream rng_;
    TrialState state_;
    OracleCache cache_;
    // separable_[h]: opponents with positive divergence from h under some action.
    std::vector<HypothesisSet> separable_;
    Allocation last_target_;
    bool finished_ = false;
    bool timed_out_ = false;
    std::optional<DiagnosticsTrace> trace_;
};

TrialResult run_trial(const Environment& env, HypothesisIndex true_h, const PolicyConfig& cfg,
                      std::uint64_t seed, bool record_diagnostics = false);

}  // namespace elimtas
