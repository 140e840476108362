// harness.hpp
//
// Seeded Monte Carlo sweeps over policies, confidence levels and elimination
// aggressiveness. Every trial draws its seed from (base seed, policy, delta,
// alpha, trial index) alone, so a cell reproduces in isolation and results do
// not depend on the worker count.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "elimtas/engine.hpp"
#include "elimtas/model.hpp"

namespace elimtas {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline const std::vector<double> kDeltaGrid = {0.1, 0.05, 0.01, 0.005, 0.001};
inline const std::vector<double> kAlphaGrid = {0.2, 0.4, 0.6, 0.8, 1.0};

struct ExperimentConfig {
    Environment env = preset_environment("skewed");
    HypothesisIndex true_h = 0;
    std::vector<PolicyKind> policies = all_policies();
    std::vector<double> deltas = kDeltaGrid;
    std::vector<double> alphas = kAlphaGrid;
    std::size_t trials = 1000;
    std::uint64_t base_seed = 0;
    std::size_t workers = 1;
    double b = 2.0;
    std::optional<double> c;  // defaults to log(K - 1)
    std::uint64_t max_steps = 1'000'000;
    // Drop the policy from seed derivation so every policy sees the same
    // per-trial seeds.
    bool paired_seeds = false;
    std::filesystem::path output;  // empty: do not write

    void validate() const;
    PolicyConfig policy_config(PolicyKind kind, double delta, double alpha) const;
};

struct SummaryRow {
    std::string environment;
    PolicyKind policy = PolicyKind::kFullElim;
    double delta = 0.0;
    double alpha = 1.0;
    std::optional<double> mean_tau;  // empty when every trial timed out
    double stderr_tau = 0.0;
    double error_rate = 0.0;
    std::size_t timeouts = 0;
    std::size_t trials = 0;
};

std::uint64_t trial_seed(std::uint64_t base_seed, PolicyKind policy, double delta, double alpha,
                         std::uint64_t trial_index, bool paired = false);

// Runs cfg.trials trials of one cell on cfg.workers threads; the result
// vector is ordered by trial index.
std::vector<TrialResult> run_cell(const ExperimentConfig& cfg, PolicyKind policy, double delta,
                                  double alpha);

// tau mean and standard error over trials that did not time out; error rate
// over every trial, a timed-out trial being judged on its champion at the
// cap. Throws std::invalid_argument on an empty sequence.
SummaryRow aggregate(std::span<const TrialResult> results);

// One row per (policy, delta) at alpha = 1.
std::vector<SummaryRow> run_delta_sweep(const ExperimentConfig& cfg);
// FullElim, one row per alpha at delta = cfg.deltas.front().
std::vector<SummaryRow> run_alpha_sweep(const ExperimentConfig& cfg);
// One recorded FullElim trial at delta = cfg.deltas.front(), alpha = cfg.alphas.back().
DiagnosticsTrace run_diagnostic_trial(const ExperimentConfig& cfg, std::uint64_t seed);

// Sorted by (policy, delta descending, alpha ascending).
void sort_rows(std::vector<SummaryRow>& rows);

inline constexpr const char* kSummaryHeader =
    "environment,policy,delta,alpha,mean_tau,stderr_tau,error_rate,timeouts,trials";
std::string summary_csv(const std::vector<SummaryRow>& rows);
void write_text_file(const std::filesystem::path& path, const std::string& contents);

// Structured per-round document; NaN entries are written as null.
std::string trace_to_json(const DiagnosticsTrace& trace);

}  // namespace elimtas
