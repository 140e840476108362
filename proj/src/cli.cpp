#include "elimtas/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "elimtas/harness.hpp"
#include "elimtas/model.hpp"
#include "elimtas/oracle.hpp"

namespace elimtas::cli {

using nlohmann::json;

namespace {

// Options shared by the subcommands that run trials.
struct RunOptions {
    std::string env = "skewed";
    std::size_t true_h = 0;
    double b = 2.0;
    std::optional<double> c;
    std::uint64_t max_steps = 1'000'000;
    std::uint64_t seed = 0;
};

struct SweepOptions {
    RunOptions run;
    std::size_t trials = 1000;
    std::size_t workers = 1;
    std::vector<double> deltas = kDeltaGrid;
    std::vector<double> alphas = kAlphaGrid;
    std::vector<std::string> policies = {"Greedy", "TaS", "StopElim", "FullElim"};
    std::string out;
    bool paired = false;
};

void add_run_options(CLI::App& cmd, RunOptions& o) {
    cmd.add_option("--env", o.env, "Preset name (skewed, hard-weak, degenerate) or environment file")
        ->capture_default_str();
    cmd.add_option("--true-h", o.true_h, "True hypothesis index")->capture_default_str();
    cmd.add_option("--b", o.b, "Threshold slope b")->capture_default_str();
    cmd.add_option("--c", o.c, "Threshold offset c (default log(K-1))");
    cmd.add_option("--max-steps", o.max_steps, "Per-trial step cap")->capture_default_str();
    cmd.add_option("--seed", o.seed, "Base seed")->capture_default_str();
}

Environment resolve_environment(const std::string& source) {
    try {
        return load_environment(source);
    } catch (const InvalidEnvironment& e) {
        throw ValidationError(e.what());
    }
}

void check_delta(double d) {
    if (!(d > 0.0 && d < 1.0)) throw ValidationError("delta must lie in (0, 1)");
}
void check_alpha(double a) {
    if (!(a > 0.0 && a <= 1.0)) throw ValidationError("alpha must lie in (0, 1]");
}

void check_run_options(const RunOptions& o, const Environment& env) {
    if (o.true_h >= env.num_hypotheses()) throw ValidationError("--true-h out of range");
    if (!(o.b > 0.0) || !std::isfinite(o.b)) throw ValidationError("--b must be positive");
    if (o.c && !std::isfinite(*o.c)) throw ValidationError("--c must be finite");
    if (o.max_steps < 1) throw ValidationError("--max-steps must be at least 1");
}

ExperimentConfig experiment_config(const SweepOptions& o) {
    Environment env = resolve_environment(o.run.env);
    check_run_options(o.run, env);
    if (o.trials < 1) throw ValidationError("--trials must be at least 1");
    if (o.workers < 1) throw ValidationError("--workers must be at least 1");
    if (o.deltas.empty()) throw ValidationError("delta grid is empty");
    if (o.alphas.empty()) throw ValidationError("alpha grid is empty");
    std::for_each(o.deltas.begin(), o.deltas.end(), check_delta);
    std::for_each(o.alphas.begin(), o.alphas.end(), check_alpha);

    ExperimentConfig cfg;
    cfg.env = std::move(env);
    cfg.true_h = o.run.true_h;
    cfg.policies.clear();
    for (const auto& p : o.policies) {
        try {
            cfg.policies.push_back(parse_policy(p));
        } catch (const std::invalid_argument& e) {
            throw ValidationError(e.what());
        }
    }
    if (cfg.policies.empty()) throw ValidationError("policy list is empty");
    cfg.deltas = o.deltas;
    cfg.alphas = o.alphas;
    cfg.trials = o.trials;
    cfg.base_seed = o.run.seed;
    cfg.workers = o.workers;
    cfg.b = o.run.b;
    cfg.c = o.run.c;
    cfg.max_steps = o.run.max_steps;
    cfg.paired_seeds = o.paired;
    if (!o.out.empty()) cfg.output = o.out;
    return cfg;
}

json config_json(const ExperimentConfig& cfg) {
    json j;
    j["environment"] = json::parse(environment_to_json(cfg.env));
    j["true_h"] = cfg.true_h;
    json policies = json::array();
    for (auto p : cfg.policies) policies.push_back(std::string(policy_name(p)));
    j["policies"] = policies;
    j["deltas"] = cfg.deltas;
    j["alphas"] = cfg.alphas;
    j["trials"] = cfg.trials;
    j["base_seed"] = cfg.base_seed;
    j["workers"] = cfg.workers;
    j["b"] = cfg.b;
    j["c"] = cfg.c.value_or(default_threshold_offset(cfg.env.num_hypotheses()));
    j["max_steps"] = cfg.max_steps;
    j["paired_seeds"] = cfg.paired_seeds;
    return j;
}

void write_manifest(const std::filesystem::path& output, const std::string& command,
                    const std::vector<std::string>& args, json resolved,
                    const std::vector<std::filesystem::path>& files) {
    json m;
    m["command"] = command;
    m["args"] = args;
    m["resolved"] = std::move(resolved);
    json outputs = json::array();
    for (const auto& f : files) outputs.push_back(f.string());
    m["outputs"] = outputs;
    write_text_file(output.string() + ".manifest.json", m.dump(2) + "\n");
}

std::string fmt_num(double v) {
    if (!std::isfinite(v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string join_indices(const std::vector<HypothesisIndex>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ' ';
        s += std::to_string(v[i]);
    }
    return s;
}

}  // namespace

std::vector<std::filesystem::path> emit_plot_data(const DiagnosticsTrace& trace,
                                                  const std::filesystem::path& prefix) {
    if (trace.rounds() == 0) throw UsageError("diagnostics trace is empty");
    const std::string base = prefix.string();
    std::vector<std::filesystem::path> files = {base + "_active_set.csv", base + "_allocation.csv",
                                                base + "_evidence.csv", base + "_rate.csv"};

    std::string active = "t,champion,removed,remaining\n";
    for (const auto& e : trace.events) {
        const auto it = std::find(trace.t.begin(), trace.t.end(), e.t);
        const auto row = static_cast<std::size_t>(it - trace.t.begin());
        active += std::to_string(e.t) + ',' + std::to_string(e.champion) + ',' +
                  join_indices(e.removed) + ',' + join_indices(trace.active_set.at(row)) + '\n';
    }

    std::string alloc = "t";
    for (std::size_t a = 0; a < trace.num_actions; ++a) alloc += ",w" + std::to_string(a);
    alloc += '\n';
    std::string evidence = "t,champion,min_Z,beta_elim\n";
    std::string rate = "t,champion,oracle_rate,empirical_rate,target_rate\n";
    for (std::size_t i = 0; i < trace.rounds(); ++i) {
        const std::string t = std::to_string(trace.t[i]);
        alloc += t;
        for (double w : trace.alloc[i]) alloc += ',' + fmt_num(w);
        alloc += '\n';
        evidence += t + ',' + std::to_string(trace.champion[i]) + ',' + fmt_num(trace.min_z[i]) +
                    ',' + fmt_num(trace.beta_elim[i]) + '\n';
        rate += t + ',' + std::to_string(trace.champion[i]) + ',' + fmt_num(trace.oracle_rate[i]) +
                ',' + fmt_num(trace.empirical_rate[i]) + ',' + fmt_num(trace.target_rate[i]) + '\n';
    }

    write_text_file(files[0], active);
    write_text_file(files[1], alloc);
    write_text_file(files[2], evidence);
    write_text_file(files[3], rate);
    return files;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Active multi-hypothesis testing with elimination-augmented Track-and-Stop",
                 "elimtas"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);

    // env
    std::string env_source = "skewed";
    auto* env_cmd = app.add_subcommand("env", "Print an environment and its per-hypothesis oracle rates");
    env_cmd->add_option("--env", env_source, "Preset name or environment file")->capture_default_str();

    // solve-oracle
    std::string oracle_env = "skewed";
    std::size_t oracle_h = 0;
    std::vector<std::size_t> oracle_opponents;
    auto* oracle_cmd = app.add_subcommand("solve-oracle", "Solve the max-min allocation for (h, S)");
    oracle_cmd->add_option("--env", oracle_env, "Preset name or environment file")->capture_default_str();
    oracle_cmd->add_option("--h", oracle_h, "Candidate hypothesis")->capture_default_str();
    oracle_cmd->add_option("--opponents", oracle_opponents, "Comma-separated opponent set (default: all others)")
        ->delimiter(',');

    // trial
    RunOptions trial_opts;
    std::string trial_policy = "FullElim";
    double trial_delta = 0.1;
    double trial_alpha = 1.0;
    auto* trial_cmd = app.add_subcommand("trial", "Run one trial and print its outcome");
    add_run_options(*trial_cmd, trial_opts);
    trial_cmd->add_option("--policy", trial_policy, "Greedy, TaS, StopElim or FullElim")->capture_default_str();
    trial_cmd->add_option("--delta", trial_delta, "Confidence level")->capture_default_str();
    trial_cmd->add_option("--alpha", trial_alpha, "Elimination aggressiveness")->capture_default_str();

    // exp1
    SweepOptions exp1;
    auto* exp1_cmd = app.add_subcommand("exp1", "Stopping time and error versus delta at alpha = 1");
    add_run_options(*exp1_cmd, exp1.run);
    exp1_cmd->add_option("--trials", exp1.trials, "Trials per cell")->capture_default_str();
    exp1_cmd->add_option("--workers", exp1.workers, "Worker threads")->capture_default_str();
    exp1_cmd->add_option("--deltas", exp1.deltas, "Comma-separated delta grid")->delimiter(',');
    exp1_cmd->add_option("--policies", exp1.policies, "Comma-separated policy list")->delimiter(',');
    exp1_cmd->add_option("--out", exp1.out, "CSV output path (default: stdout)");
    exp1_cmd->add_flag("--paired", exp1.paired, "Share per-trial seeds across policies");

    // exp2
    SweepOptions exp2;
    double exp2_delta = 0.1;
    auto* exp2_cmd = app.add_subcommand("exp2", "FullElim stopping time and error versus alpha");
    add_run_options(*exp2_cmd, exp2.run);
    exp2_cmd->add_option("--trials", exp2.trials, "Trials per cell")->capture_default_str();
    exp2_cmd->add_option("--workers", exp2.workers, "Worker threads")->capture_default_str();
    exp2_cmd->add_option("--delta", exp2_delta, "Confidence level")->capture_default_str();
    exp2_cmd->add_option("--alphas", exp2.alphas, "Comma-separated alpha grid")->delimiter(',');
    exp2_cmd->add_option("--out", exp2.out, "CSV output path (default: stdout)");

    // diagnose
    RunOptions diag_opts;
    double diag_delta = 0.1;
    double diag_alpha = 1.0;
    std::string diag_out;
    auto* diag_cmd = app.add_subcommand("diagnose", "Record one FullElim trial and write plot data");
    add_run_options(*diag_cmd, diag_opts);
    diag_cmd->add_option("--delta", diag_delta, "Confidence level")->capture_default_str();
    diag_cmd->add_option("--alpha", diag_alpha, "Elimination aggressiveness")->capture_default_str();
    diag_cmd->add_option("--out", diag_out, "Output prefix")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (env_cmd->parsed()) {
            const Environment env = resolve_environment(env_source);
            json doc = json::parse(environment_to_json(env));
            json rates = json::array();
            for (std::size_t h = 0; h < env.num_hypotheses(); ++h) {
                HypothesisSet opp;
                for (std::size_t g = 0; g < env.num_hypotheses(); ++g) {
                    if (g != h && env.distinguishable(h, g)) opp.insert(g);
                }
                if (opp.empty()) {
                    rates.push_back(nullptr);
                } else {
                    rates.push_back(oracle_allocation(env, h, opp).rate);
                }
            }
            doc["oracle_rate_vs_all"] = rates;
            out << doc.dump(2) << "\n";
            return kExitOk;
        }

        if (oracle_cmd->parsed()) {
            const Environment env = resolve_environment(oracle_env);
            if (oracle_h >= env.num_hypotheses()) throw ValidationError("--h out of range");
            HypothesisSet opp;
            if (oracle_opponents.empty()) {
                opp = HypothesisSet::all_but(env.num_hypotheses(), oracle_h);
            } else {
                for (auto g : oracle_opponents) {
                    if (g >= env.num_hypotheses()) throw ValidationError("opponent index out of range");
                    if (g == oracle_h) throw ValidationError("opponent set must exclude --h");
                    opp.insert(g);
                }
            }
            OracleSolution sol;
            try {
                sol = oracle_allocation(env, oracle_h, opp);
            } catch (const OracleError& e) {
                throw ValidationError(e.what());
            }
            json rec;
            rec["environment"] = env.name();
            rec["h"] = oracle_h;
            rec["opponents"] = opp.indices();
            rec["allocation"] = std::vector<double>(sol.allocation.weights().begin(),
                                                    sol.allocation.weights().end());
            rec["rate"] = sol.rate;
            out << rec.dump(2) << "\n";
            return kExitOk;
        }

        if (trial_cmd->parsed()) {
            const Environment env = resolve_environment(trial_opts.env);
            check_run_options(trial_opts, env);
            check_delta(trial_delta);
            check_alpha(trial_alpha);
            PolicyKind kind;
            try {
                kind = parse_policy(trial_policy);
            } catch (const std::invalid_argument& e) {
                throw ValidationError(e.what());
            }
            PolicyConfig cfg = PolicyConfig::defaults(env, kind, trial_delta, trial_alpha);
            cfg.b = trial_opts.b;
            if (trial_opts.c) cfg.c = *trial_opts.c;
            cfg.max_steps = trial_opts.max_steps;
            const TrialResult r = run_trial(env, trial_opts.true_h, cfg, trial_opts.seed);
            json rec;
            rec["environment"] = env.name();
            rec["policy"] = std::string(policy_name(kind));
            rec["delta"] = trial_delta;
            rec["alpha"] = trial_alpha;
            rec["b"] = cfg.b;
            rec["c"] = cfg.c;
            rec["seed"] = trial_opts.seed;
            rec["tau"] = r.tau;
            rec["recommendation"] = r.recommendation;
            rec["correct"] = r.correct;
            rec["timed_out"] = r.timed_out;
            out << rec.dump(2) << "\n";
            return kExitOk;
        }

        if (exp1_cmd->parsed() || exp2_cmd->parsed()) {
            const bool is_exp1 = exp1_cmd->parsed();
            SweepOptions& opts = is_exp1 ? exp1 : exp2;
            if (!is_exp1) {
                check_delta(exp2_delta);
                opts.deltas = {exp2_delta};
                opts.policies = {"FullElim"};
            }
            const ExperimentConfig cfg = experiment_config(opts);
            const auto rows = is_exp1 ? run_delta_sweep(cfg) : run_alpha_sweep(cfg);
            if (cfg.output.empty()) {
                out << summary_csv(rows);
            } else {
                write_manifest(cfg.output, is_exp1 ? "exp1" : "exp2", args, config_json(cfg),
                               {cfg.output});
                out << "wrote " << rows.size() << " rows to " << cfg.output.string() << "\n";
            }
            return kExitOk;
        }

        if (diag_cmd->parsed()) {
            SweepOptions opts;
            opts.run = diag_opts;
            opts.trials = 1;
            opts.deltas = {diag_delta};
            opts.alphas = {diag_alpha};
            opts.policies = {"FullElim"};
            check_delta(diag_delta);
            check_alpha(diag_alpha);
            ExperimentConfig cfg = experiment_config(opts);
            const DiagnosticsTrace trace = run_diagnostic_trial(cfg, diag_opts.seed);
            const std::filesystem::path prefix = diag_out;
            std::vector<std::filesystem::path> files = emit_plot_data(trace, prefix);
            const std::filesystem::path trace_path = prefix.string() + ".json";
            write_text_file(trace_path, trace_to_json(trace) + "\n");
            files.insert(files.begin(), trace_path);
            json resolved = config_json(cfg);
            resolved["seed"] = diag_opts.seed;
            write_manifest(prefix, "diagnose", args, resolved, files);
            out << "tau=" << trace.t.back() << " eliminations=" << trace.events.size()
                << " champion=" << trace.champion.back() << "\n";
            for (const auto& f : files) out << "wrote " << f.string() << "\n";
            return kExitOk;
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    err << "usage error: no subcommand\n";
    return kExitUsage;
}

int dispatch(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return dispatch(args, std::cout, std::cerr);
}

}  // namespace elimtas::cli
