#include "elimtas/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace elimtas {

std::string_view policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::kGreedy: return "Greedy";
        case PolicyKind::kTaS: return "TaS";
        case PolicyKind::kStopElim: return "StopElim";
        case PolicyKind::kFullElim: return "FullElim";
    }
    return "?";
}

PolicyKind parse_policy(std::string_view name) {
    for (auto kind : all_policies()) {
        if (name == policy_name(kind)) return kind;
    }
    throw std::invalid_argument("unknown policy '" + std::string(name) +
                                "' (expected Greedy, TaS, StopElim or FullElim)");
}

std::vector<PolicyKind> all_policies() {
    return {PolicyKind::kGreedy, PolicyKind::kTaS, PolicyKind::kStopElim, PolicyKind::kFullElim};
}

double default_threshold_offset(std::size_t num_hypotheses) {
    return num_hypotheses > 1 ? std::log(static_cast<double>(num_hypotheses - 1)) : 0.0;
}

PolicyConfig PolicyConfig::defaults(const Environment& env, PolicyKind kind, double delta,
                                    double alpha) {
    PolicyConfig cfg;
    cfg.kind = kind;
    cfg.delta = delta;
    cfg.alpha = alpha;
    cfg.c = default_threshold_offset(env.num_hypotheses());
    return cfg;
}

void PolicyConfig::validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
    if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("b must be positive");
    if (!std::isfinite(c)) throw std::invalid_argument("c must be finite");
    if (max_steps < 1) throw std::invalid_argument("max_steps must be at least 1");
}

Thresholds thresholds(std::uint64_t t, const PolicyConfig& cfg) {
    if (t < 1) throw std::invalid_argument("thresholds are defined for t >= 1");
    const double log_inv_delta = -std::log(cfg.delta);
    const double gamma = cfg.b * std::log(static_cast<double>(t)) + cfg.c;
    return {log_inv_delta + gamma, cfg.alpha * log_inv_delta + gamma};
}

// --- TrialState -------------------------------------------------------------

TrialState::TrialState(const Environment& env)
    : env_(&env),
      counts_(env.num_actions(), 0),
      loglik_(env.num_hypotheses(), 0.0),
      target_(env.num_actions(), 0.0),
      tracked_(env.num_actions(), 0.0) {
    const std::size_t k = env.num_hypotheses();
    active_.reserve(k);
    for (std::size_t i = 0; i < k; ++i) active_.push_back(HypothesisSet::all_but(k, i));
}

void TrialState::update_likelihoods(ActionIndex a, double observation) {
    const Environment& env = *env_;
    const double inv_two_var = 1.0 / (2.0 * env.sigma() * env.sigma());
    const std::size_t k = env.num_hypotheses();
    for (std::size_t h = 0; h < k; ++h) {
        const double r = observation - env.mean(a, h);
        loglik_[h] -= r * r * inv_two_var;
    }
    ++counts_[a];
    ++t_;
    champion_ = static_cast<HypothesisIndex>(std::max_element(loglik_.begin(), loglik_.end()) -
                                             loglik_.begin());
}

double TrialState::llr(HypothesisIndex h, HypothesisIndex g) const {
    if (h == g) throw std::invalid_argument("llr requires distinct hypotheses");
    return loglik_.at(h) - loglik_.at(g);
}

ActionIndex TrialState::ctrack_select(const Allocation& target_now) {
    const std::size_t n = counts_.size();
    if (target_now.size() != n) throw std::invalid_argument("target size mismatch");
    const double nd = static_cast<double>(n);
    const double eps = 0.5 / std::sqrt(nd * nd + static_cast<double>(t_));
    const double keep = 1.0 - nd * eps;
    ActionIndex best = 0;
    double best_deficit = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n; ++a) {
        target_[a] += target_now[a];
        tracked_[a] += eps + keep * target_now[a];
        const double deficit = tracked_[a] - static_cast<double>(counts_[a]);
        if (deficit > best_deficit) {
            best_deficit = deficit;
            best = a;
        }
    }
    return best;
}

HypothesisSet TrialState::eliminate(const PolicyConfig& cfg) {
    HypothesisSet& set = active_[champion_];
    if (set.empty()) return {};
    const double beta = thresholds(t_, cfg).elim;
    HypothesisSet removed;
    set.for_each([&](std::size_t g) {
        if (loglik_[champion_] - loglik_[g] >= beta) removed.insert(g);
    });
    set = set.minus(removed);
    return removed;
}

ActionIndex TrialState::greedy_select() const {
    if (t_ == 0) return 0;
    const std::size_t k = loglik_.size();
    HypothesisIndex rival = k;
    double rival_z = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < k; ++g) {
        if (g == champion_) continue;
        const double z = loglik_[champion_] - loglik_[g];
        if (z < rival_z) {
            rival_z = z;
            rival = g;
        }
    }
    if (rival == k) return 0;
    const auto& kl = env_->kl_table();
    ActionIndex best = 0;
    double best_d = -1.0;
    for (std::size_t a = 0; a < counts_.size(); ++a) {
        const double d = kl(a, champion_, rival);
        if (d > best_d) {
            best_d = d;
            best = a;
        }
    }
    return best;
}

double TrialState::min_llr_against(HypothesisSet opponents) const {
    double m = std::numeric_limits<double>::infinity();
    opponents.for_each([&](std::size_t g) { m = std::min(m, loglik_[champion_] - loglik_[g]); });
    return m;
}

// --- Trial ------------------------------------------------------------------

Trial::Trial(const Environment& env, HypothesisIndex true_h, const PolicyConfig& cfg,
             std::uint64_t seed, bool record_diagnostics)
    : env_(&env), true_h_(true_h), cfg_(cfg), rng_(seed), state_(env), cache_(env) {
    cfg_.validate();
    separable_.resize(env.num_hypotheses());
    for (std::size_t h = 0; h < env.num_hypotheses(); ++h) {
        for (std::size_t g = 0; g < env.num_hypotheses(); ++g) {
            if (g != h && env.distinguishable(h, g)) separable_[h].insert(g);
        }
    }
    if (true_h >= env.num_hypotheses()) throw std::out_of_range("true hypothesis out of range");
    if (env.num_hypotheses() < 2) throw std::invalid_argument("need at least two hypotheses");
    if (record_diagnostics) {
        if (!uses_elimination(cfg_.kind)) {
            throw std::invalid_argument("diagnostics are recorded for elimination policies only");
        }
        trace_.emplace();
        trace_->num_actions = env.num_actions();
    }
}

HypothesisSet Trial::sampling_opponents() const {
    const HypothesisIndex champ = state_.champion();
    if (cfg_.kind == PolicyKind::kFullElim) return state_.active(champ);
    return HypothesisSet::all_but(env_->num_hypotheses(), champ);
}

Allocation Trial::tracking_target(HypothesisSet opponents) {
    // Opponents with zero divergence under every action can never be
    // separated from the champion and carry no allocation signal.
    const HypothesisIndex champ = state_.champion();
    const HypothesisSet effective(opponents.bits() & separable_[champ].bits());
    if (effective.empty()) return Allocation::uniform(env_->num_actions());
    return cache_.solve(champ, effective).allocation;
}

bool Trial::stop_rule_met() {
    const HypothesisIndex champ = state_.champion();
    if (uses_elimination(cfg_.kind)) {
        const HypothesisSet before = state_.active(champ);
        const HypothesisSet removed = state_.eliminate(cfg_);
        if (trace_) record_round(before, removed);
        return state_.active(champ).empty();
    }
    const double beta = thresholds(state_.t(), cfg_).stop;
    return state_.min_llr_against(HypothesisSet::all_but(env_->num_hypotheses(), champ)) >= beta;
}

bool Trial::step() {
    if (finished_) return true;

    ActionIndex a = 0;
    if (cfg_.kind == PolicyKind::kGreedy) {
        a = state_.greedy_select();
    } else {
        last_target_ = tracking_target(sampling_opponents());
        a = state_.ctrack_select(last_target_);
    }
    const double o = env_->mean(a, true_h_) + env_->sigma() * rng_.standard_normal();
    state_.update_likelihoods(a, o);

    if (stop_rule_met()) {
        finished_ = true;
    } else if (state_.t() >= cfg_.max_steps) {
        finished_ = true;
        timed_out_ = true;
    }
    return finished_;
}

void Trial::record_round(HypothesisSet before, HypothesisSet removed) {
    DiagnosticsTrace& tr = *trace_;
    const std::uint64_t t = state_.t();
    const HypothesisIndex champ = state_.champion();
    const HypothesisSet active = state_.active(champ);
    const double td = static_cast<double>(t);
    const std::size_t n = env_->num_actions();

    std::vector<double> empirical(n), average_target(n);
    for (std::size_t a = 0; a < n; ++a) {
        empirical[a] = static_cast<double>(state_.counts()[a]) / td;
        average_target[a] = state_.target()[a] / td;
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    const HypothesisSet effective(active.bits() & separable_[champ].bits());
    double oracle = nan, emp_rate = nan, tgt_rate = nan, lip = nan;
    if (!effective.empty()) {
        const DivergenceRows rows = divergence_rows(*env_, champ, effective);
        oracle = cache_.solve(champ, effective).rate;
        emp_rate = worst_case_rate(rows, empirical);
        tgt_rate = worst_case_rate(rows, average_target);
        lip = lipschitz_constant(rows);
    }

    tr.t.push_back(t);
    tr.champion.push_back(champ);
    tr.active_set.push_back(active.indices());
    tr.alloc.push_back(std::move(empirical));
    tr.min_z.push_back(before.empty() ? nan : state_.min_llr_against(before));
    tr.beta_elim.push_back(thresholds(t, cfg_).elim);
    tr.oracle_rate.push_back(oracle);
    tr.empirical_rate.push_back(emp_rate);
    tr.target_rate.push_back(tgt_rate);
    tr.lipschitz.push_back(lip);
    if (!removed.empty()) tr.events.push_back({t, champ, removed.indices()});
}

TrialResult Trial::result() const {
    if (!finished_) throw std::logic_error("trial has not finished");
    TrialResult r;
    r.tau = state_.t();
    r.recommendation = state_.champion();
    r.correct = r.recommendation == true_h_;
    r.timed_out = timed_out_;
    r.diagnostics = trace_;
    return r;
}

TrialResult Trial::take_result() {
    if (!finished_) throw std::logic_error("trial has not finished");
    TrialResult r;
    r.tau = state_.t();
    r.recommendation = state_.champion();
    r.correct = r.recommendation == true_h_;
    r.timed_out = timed_out_;
    r.diagnostics = std::move(trace_);
    trace_.reset();
    return r;
}

TrialResult run_trial(const Environment& env, HypothesisIndex true_h, const PolicyConfig& cfg,
                      std::uint64_t seed, bool record_diagnostics) {
    Trial trial(env, true_h, cfg, seed, record_diagnostics);
    while (!trial.step()) {
    }
    return trial.take_result();
}

}  // namespace elimtas
