// model.hpp
//
// Gaussian active-sensing environments: hypotheses x actions, mean matrix,
// common noise scale. Environments are immutable once constructed and carry
// a precomputed table of action-wise KL divergences.
#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "elimtas/rng.hpp"

namespace elimtas {

using HypothesisIndex = std::size_t;
using ActionIndex = std::size_t;

// Thrown for malformed documents, bad dimensions, sigma <= 0, or
// identifiability violations.
class InvalidEnvironment : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// d_a(h,g) for every (action, hypothesis, hypothesis) triple, in nats per
// observation. Flat storage, action-major.
class KlTable {
public:
    KlTable() = default;
    KlTable(std::size_t num_actions, std::size_t num_hypotheses);

    double operator()(ActionIndex a, HypothesisIndex h, HypothesisIndex g) const {
        return values_[(a * k_ + h) * k_ + g];
    }
    double& at(ActionIndex a, HypothesisIndex h, HypothesisIndex g) {
        return values_[(a * k_ + h) * k_ + g];
    }

    std::size_t num_actions() const { return num_actions_; }
    std::size_t num_hypotheses() const { return k_; }

private:
    std::size_t num_actions_ = 0;
    std::size_t k_ = 0;
    std::vector<double> values_;
};

enum class Identifiability {
    // Every hypothesis pair must be separated by some action.
    kStrict,
    // Indistinguishable pairs are tolerated and reported.
    kReportOnly,
};

class Environment {
public:
    // `means` is indexed [action][hypothesis], matching the printed layout
    // (actions as rows).
    Environment(std::string name, std::vector<std::vector<double>> means,
                double sigma = 1.0,
                Identifiability check = Identifiability::kStrict);

    const std::string& name() const { return name_; }
    std::size_t num_hypotheses() const { return num_hypotheses_; }
    std::size_t num_actions() const { return num_actions_; }
    double sigma() const { return sigma_; }
    double mean(ActionIndex a, HypothesisIndex h) const { return means_[a * num_hypotheses_ + h]; }
    const KlTable& kl_table() const { return kl_; }

    // Pairs (h, g), h < g, with zero divergence under every action. Empty for
    // environments built with Identifiability::kStrict.
    const std::vector<std::pair<HypothesisIndex, HypothesisIndex>>& indistinguishable_pairs() const {
        return indistinguishable_;
    }
    bool distinguishable(HypothesisIndex h, HypothesisIndex g) const;

    // Row-major copy of the mean matrix, actions as rows.
    std::vector<std::vector<double>> mean_rows() const;

private:
    std::string name_;
    std::size_t num_hypotheses_ = 0;
    std::size_t num_actions_ = 0;
    std::vector<double> means_;
    double sigma_ = 1.0;
    KlTable kl_;
    std::vector<std::pair<HypothesisIndex, HypothesisIndex>> indistinguishable_;
};

// Built-in environments: "skewed", "hard-weak", "degenerate".
std::vector<std::string> preset_names();
Environment preset_environment(std::string_view name);

// Parses an environment document:
//   {"name": "...", "means": [[...], ...], "sigma": 1.0}
// `means` holds one row per action. Optional "num_actions"/"num_hypotheses"
// fields are cross-checked; with both present, "means" may also be a flat
// row-major array. "require_identifiable": false downgrades the pairwise
// identifiability check to a report.
Environment parse_environment(std::string_view document);

// Resolves a preset name first, otherwise reads the file at `source`.
Environment load_environment(std::string_view source);

std::string environment_to_json(const Environment& env);

double kl(const Environment& env, ActionIndex a, HypothesisIndex h, HypothesisIndex g);

// -(o - mu)^2 / (2 sigma^2). The hypothesis-independent normalising constant
// is dropped; only differences across hypotheses are ever consumed.
double log_density(const Environment& env, ActionIndex a, HypothesisIndex h, double observation);

// One draw from N(mu_{a,h}, sigma^2), consuming exactly one 64-bit word.
double sample_observation(const Environment& env, ActionIndex a, HypothesisIndex h,
                          RandomStream& rng);

}  // namespace elimtas
