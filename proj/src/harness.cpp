#include "elimtas/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

namespace elimtas {

void ExperimentConfig::validate() const {
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (workers < 1) throw std::invalid_argument("workers must be at least 1");
    if (policies.empty()) throw std::invalid_argument("policy list is empty");
    if (deltas.empty()) throw std::invalid_argument("delta grid is empty");
    if (alphas.empty()) throw std::invalid_argument("alpha grid is empty");
    if (true_h >= env.num_hypotheses()) throw std::invalid_argument("true hypothesis out of range");
    for (double d : deltas) {
        if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument("every delta must lie in (0, 1)");
    }
    for (double a : alphas) {
        if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("every alpha must lie in (0, 1]");
    }
    policy_config(PolicyKind::kFullElim, deltas.front(), alphas.front()).validate();
}

PolicyConfig ExperimentConfig::policy_config(PolicyKind kind, double delta, double alpha) const {
    PolicyConfig p = PolicyConfig::defaults(env, kind, delta, alpha);
    p.b = b;
    if (c) p.c = *c;
    p.max_steps = max_steps;
    return p;
}

std::uint64_t trial_seed(std::uint64_t base_seed, PolicyKind policy, double delta, double alpha,
                         std::uint64_t trial_index, bool paired) {
    const std::uint64_t policy_id = paired ? 0xa5a5ULL : static_cast<std::uint64_t>(policy) + 1;
    std::uint64_t h = mix64(policy_id);
    h = mix64(h ^ std::bit_cast<std::uint64_t>(delta));
    h = mix64(h ^ std::bit_cast<std::uint64_t>(alpha));
    h = mix64(h ^ trial_index);
    return base_seed ^ h;
}

std::vector<TrialResult> run_cell(const ExperimentConfig& cfg, PolicyKind policy, double delta,
                                  double alpha) {
    const PolicyConfig pcfg = cfg.policy_config(policy, delta, alpha);
    pcfg.validate();
    std::vector<TrialResult> results(cfg.trials);

    auto run_one = [&](std::size_t i) {
        results[i] = run_trial(cfg.env, cfg.true_h, pcfg,
                               trial_seed(cfg.base_seed, policy, delta, alpha, i, cfg.paired_seeds));
    };

    const std::size_t workers = std::min(cfg.workers, cfg.trials);
    if (workers <= 1) {
        for (std::size_t i = 0; i < cfg.trials; ++i) run_one(i);
        return results;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < cfg.trials; i = next.fetch_add(1)) {
                    try {
                        run_one(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

SummaryRow aggregate(std::span<const TrialResult> results) {
    if (results.empty()) throw std::invalid_argument("cannot aggregate zero trials");
    SummaryRow row;
    row.trials = results.size();
    std::size_t wrong = 0;
    double sum = 0.0;
    std::size_t completed = 0;
    for (const auto& r : results) {
        if (!r.correct) ++wrong;
        if (r.timed_out) {
            ++row.timeouts;
            continue;
        }
        sum += static_cast<double>(r.tau);
        ++completed;
    }
    row.error_rate = static_cast<double>(wrong) / static_cast<double>(results.size());
    if (completed > 0) {
        const double mean = sum / static_cast<double>(completed);
        row.mean_tau = mean;
        if (completed > 1) {
            double ss = 0.0;
            for (const auto& r : results) {
                if (r.timed_out) continue;
                const double d = static_cast<double>(r.tau) - mean;
                ss += d * d;
            }
            const double n = static_cast<double>(completed);
            row.stderr_tau = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
        }
    }
    return row;
}

namespace {

SummaryRow run_labelled_cell(const ExperimentConfig& cfg, PolicyKind policy, double delta,
                             double alpha) {
    const auto results = run_cell(cfg, policy, delta, alpha);
    SummaryRow row = aggregate(results);
    row.environment = cfg.env.name();
    row.policy = policy;
    row.delta = delta;
    row.alpha = alpha;
    return row;
}

void maybe_write(const ExperimentConfig& cfg, const std::vector<SummaryRow>& rows) {
    if (!cfg.output.empty()) write_text_file(cfg.output, summary_csv(rows));
}

}  // namespace

std::vector<SummaryRow> run_delta_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<SummaryRow> rows;
    for (PolicyKind policy : cfg.policies) {
        for (double delta : cfg.deltas) rows.push_back(run_labelled_cell(cfg, policy, delta, 1.0));
    }
    sort_rows(rows);
    maybe_write(cfg, rows);
    return rows;
}

std::vector<SummaryRow> run_alpha_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<SummaryRow> rows;
    for (double alpha : cfg.alphas) {
        rows.push_back(run_labelled_cell(cfg, PolicyKind::kFullElim, cfg.deltas.front(), alpha));
    }
    sort_rows(rows);
    maybe_write(cfg, rows);
    return rows;
}

DiagnosticsTrace run_diagnostic_trial(const ExperimentConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const PolicyConfig pcfg =
        cfg.policy_config(PolicyKind::kFullElim, cfg.deltas.front(), cfg.alphas.back());
    TrialResult r = run_trial(cfg.env, cfg.true_h, pcfg, seed, true);
    if (!cfg.output.empty()) write_text_file(cfg.output, trace_to_json(*r.diagnostics));
    return std::move(*r.diagnostics);
}

void sort_rows(std::vector<SummaryRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const SummaryRow& x, const SummaryRow& y) {
        if (x.policy != y.policy) return static_cast<int>(x.policy) < static_cast<int>(y.policy);
        if (x.delta != y.delta) return x.delta > y.delta;
        return x.alpha < y.alpha;
    });
}

namespace {

std::string format_double(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

}  // namespace

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::string out = kSummaryHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += r.environment;
        out += ',';
        out += policy_name(r.policy);
        out += ',' + format_double("%g", r.delta);
        out += ',' + format_double("%g", r.alpha);
        out += ',' + (r.mean_tau ? format_double("%.4f", *r.mean_tau) : std::string("NA"));
        out += ',' + format_double("%.4f", r.stderr_tau);
        out += ',' + format_double("%.4f", r.error_rate);
        out += ',' + std::to_string(r.timeouts);
        out += ',' + std::to_string(r.trials);
        out += '\n';
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << contents;
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string trace_to_json(const DiagnosticsTrace& trace) {
    using nlohmann::json;
    auto series = [](const std::vector<double>& v) {
        json arr = json::array();
        for (double x : v) arr.push_back(std::isfinite(x) ? json(x) : json(nullptr));
        return arr;
    };
    json doc;
    doc["num_actions"] = trace.num_actions;
    doc["t"] = trace.t;
    doc["champion"] = trace.champion;
    doc["active_set"] = trace.active_set;
    doc["alloc"] = trace.alloc;
    doc["min_Z"] = series(trace.min_z);
    doc["beta_elim"] = series(trace.beta_elim);
    doc["oracle_rate"] = series(trace.oracle_rate);
    doc["empirical_rate"] = series(trace.empirical_rate);
    doc["target_rate"] = series(trace.target_rate);
    doc["lipschitz"] = series(trace.lipschitz);
    json events = json::array();
    for (const auto& e : trace.events) {
        events.push_back({{"t", e.t}, {"champion", e.champion}, {"removed", e.removed}});
    }
    doc["events"] = std::move(events);
    return doc.dump();
}

}  // namespace elimtas
