#include "elimtas/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace elimtas {

using json = nlohmann::json;

KlTable::KlTable(std::size_t num_actions, std::size_t num_hypotheses)
    : num_actions_(num_actions),
      k_(num_hypotheses),
      values_(num_actions * num_hypotheses * num_hypotheses, 0.0) {}

Environment::Environment(std::string name, std::vector<std::vector<double>> means, double sigma,
                         Identifiability check)
    : name_(std::move(name)), sigma_(sigma) {
    if (means.empty() || means.front().empty()) {
        throw InvalidEnvironment("environment '" + name_ + "': mean matrix is empty");
    }
    num_actions_ = means.size();
    num_hypotheses_ = means.front().size();
    for (std::size_t a = 0; a < num_actions_; ++a) {
        if (means[a].size() != num_hypotheses_) {
            throw InvalidEnvironment("environment '" + name_ + "': row " + std::to_string(a) +
                                     " has " + std::to_string(means[a].size()) +
                                     " entries, expected " + std::to_string(num_hypotheses_));
        }
    }
    if (num_hypotheses_ > 64) {
        throw InvalidEnvironment("environment '" + name_ + "': at most 64 hypotheses supported");
    }
    if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) {
        throw InvalidEnvironment("environment '" + name_ + "': sigma must be positive and finite");
    }

    means_.reserve(num_actions_ * num_hypotheses_);
    for (const auto& row : means) {
        for (double m : row) {
            if (!std::isfinite(m)) {
                throw InvalidEnvironment("environment '" + name_ + "': non-finite mean");
            }
            means_.push_back(m);
        }
    }

    kl_ = KlTable(num_actions_, num_hypotheses_);
    const double inv_two_var = 1.0 / (2.0 * sigma_ * sigma_);
    for (std::size_t a = 0; a < num_actions_; ++a) {
        for (std::size_t h = 0; h < num_hypotheses_; ++h) {
            for (std::size_t g = 0; g < num_hypotheses_; ++g) {
                const double gap = mean(a, h) - mean(a, g);
                kl_.at(a, h, g) = gap * gap * inv_two_var;
            }
        }
    }

    for (std::size_t h = 0; h < num_hypotheses_; ++h) {
        for (std::size_t g = h + 1; g < num_hypotheses_; ++g) {
            if (!distinguishable(h, g)) indistinguishable_.emplace_back(h, g);
        }
    }
    if (check == Identifiability::kStrict && !indistinguishable_.empty()) {
        const auto [h, g] = indistinguishable_.front();
        throw InvalidEnvironment("environment '" + name_ + "': hypotheses " + std::to_string(h) +
                                 " and " + std::to_string(g) +
                                 " are not separated by any action");
    }
}

bool Environment::distinguishable(HypothesisIndex h, HypothesisIndex g) const {
    for (std::size_t a = 0; a < num_actions_; ++a) {
        if (kl_(a, h, g) > 0.0) return true;
    }
    return false;
}

std::vector<std::vector<double>> Environment::mean_rows() const {
    std::vector<std::vector<double>> rows(num_actions_, std::vector<double>(num_hypotheses_));
    for (std::size_t a = 0; a < num_actions_; ++a) {
        for (std::size_t h = 0; h < num_hypotheses_; ++h) rows[a][h] = mean(a, h);
    }
    return rows;
}

std::vector<std::string> preset_names() { return {"skewed", "hard-weak", "degenerate"}; }

Environment preset_environment(std::string_view name) {
    if (name == "skewed") {
        return Environment("skewed", {{0.5, 0.9, 0.5, 0.3, 0.7},
                                      {0.3, 0.5, 0.3, 0.5, 0.3},
                                      {0.5, 0.2, 0.5, 0.3, 0.8},
                                      {0.7, 0.3, 0.7, 0.1, 0.5},
                                      {0.4, 0.6, 0.6, 0.4, 0.2}});
    }
    if (name == "hard-weak") {
        return Environment("hard-weak", {{0.9, 0.8, 0.2, 0.2, 0.2},
                                         {0.8, 0.65, 0.2, 0.2, 0.2},
                                         {0.1, 0.1, 0.8, 0.1, 0.1},
                                         {0.2, 0.2, 0.1, 0.8, 0.2},
                                         {0.1, 0.2, 0.1, 0.2, 0.9}});
    }
    if (name == "degenerate") {
        // Hypotheses 3 and 4 share a column in the published matrix; the pair
        // is reported rather than rejected.
        return Environment("degenerate",
                           {{0.5, 0.9, 0.1, 0.5, 0.5},
                            {0.5, 0.1, 0.9, 0.5, 0.5},
                            {0.5, 0.5, 0.5, 0.5, 0.5},
                            {0.5, 0.5, 0.5, 0.5, 0.5},
                            {0.55, 0.45, 0.45, 0.45, 0.45}},
                           1.0, Identifiability::kReportOnly);
    }
    throw InvalidEnvironment("unknown environment preset '" + std::string(name) + "'");
}

namespace {

std::size_t read_dimension(const json& doc, const char* key) {
    const auto& v = doc.at(key);
    if (!v.is_number_integer() || v.get<long long>() <= 0) {
        throw InvalidEnvironment(std::string("field '") + key + "' must be a positive integer");
    }
    return v.get<std::size_t>();
}

double read_number(const json& v) {
    if (!v.is_number()) throw InvalidEnvironment("mean entries must be numbers");
    return v.get<double>();
}

}  // namespace

Environment parse_environment(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw InvalidEnvironment(std::string("malformed environment document: ") + e.what());
    }
    if (!doc.is_object()) throw InvalidEnvironment("environment document must be an object");
    if (!doc.contains("means")) throw InvalidEnvironment("environment document lacks 'means'");

    const std::string name = doc.value("name", std::string("custom"));
    double sigma = 1.0;
    if (doc.contains("sigma")) {
        if (!doc["sigma"].is_number()) throw InvalidEnvironment("'sigma' must be a number");
        sigma = doc["sigma"].get<double>();
    }
    auto check = Identifiability::kStrict;
    if (doc.contains("require_identifiable")) {
        if (!doc["require_identifiable"].is_boolean()) {
            throw InvalidEnvironment("'require_identifiable' must be a boolean");
        }
        if (!doc["require_identifiable"].get<bool>()) check = Identifiability::kReportOnly;
    }

    const bool has_a = doc.contains("num_actions");
    const bool has_k = doc.contains("num_hypotheses");
    const json& raw = doc["means"];
    if (!raw.is_array() || raw.empty()) throw InvalidEnvironment("'means' must be a nonempty array");

    std::vector<std::vector<double>> rows;
    if (raw.front().is_array()) {
        for (const auto& row : raw) {
            if (!row.is_array()) throw InvalidEnvironment("'means' mixes rows and scalars");
            std::vector<double> r;
            for (const auto& v : row) r.push_back(read_number(v));
            rows.push_back(std::move(r));
        }
    } else {
        if (!has_a || !has_k) {
            throw InvalidEnvironment("flat 'means' requires 'num_actions' and 'num_hypotheses'");
        }
        const std::size_t na = read_dimension(doc, "num_actions");
        const std::size_t nk = read_dimension(doc, "num_hypotheses");
        if (raw.size() != na * nk) {
            throw InvalidEnvironment("'means' has " + std::to_string(raw.size()) +
                                     " entries, expected " + std::to_string(na * nk));
        }
        rows.assign(na, std::vector<double>(nk));
        for (std::size_t i = 0; i < raw.size(); ++i) rows[i / nk][i % nk] = read_number(raw[i]);
    }

    if (has_a && read_dimension(doc, "num_actions") != rows.size()) {
        throw InvalidEnvironment("'num_actions' does not match the number of mean rows");
    }
    if (has_k) {
        const std::size_t nk = read_dimension(doc, "num_hypotheses");
        for (const auto& r : rows) {
            if (r.size() != nk) {
                throw InvalidEnvironment("'num_hypotheses' does not match the mean row length");
            }
        }
    }
    return Environment(name, std::move(rows), sigma, check);
}

Environment load_environment(std::string_view source) {
    for (const auto& preset : preset_names()) {
        if (source == preset) return preset_environment(source);
    }
    std::ifstream in{std::filesystem::path(source)};
    if (!in) {
        throw InvalidEnvironment("no preset or readable file named '" + std::string(source) + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_environment(buf.str());
}

std::string environment_to_json(const Environment& env) {
    json doc;
    doc["name"] = env.name();
    doc["num_actions"] = env.num_actions();
    doc["num_hypotheses"] = env.num_hypotheses();
    doc["means"] = env.mean_rows();
    doc["sigma"] = env.sigma();
    if (!env.indistinguishable_pairs().empty()) {
        doc["require_identifiable"] = false;
        doc["indistinguishable_pairs"] = env.indistinguishable_pairs();
    }
    return doc.dump(2);
}

namespace {

void check_indices(const Environment& env, ActionIndex a, HypothesisIndex h) {
    if (a >= env.num_actions()) throw std::out_of_range("action index out of range");
    if (h >= env.num_hypotheses()) throw std::out_of_range("hypothesis index out of range");
}

}  // namespace

double kl(const Environment& env, ActionIndex a, HypothesisIndex h, HypothesisIndex g) {
    check_indices(env, a, h);
    check_indices(env, a, g);
    return env.kl_table()(a, h, g);
}

double log_density(const Environment& env, ActionIndex a, HypothesisIndex h, double observation) {
    check_indices(env, a, h);
    if (!std::isfinite(observation)) throw std::invalid_argument("non-finite observation");
    const double r = observation - env.mean(a, h);
    return -(r * r) / (2.0 * env.sigma() * env.sigma());
}

double sample_observation(const Environment& env, ActionIndex a, HypothesisIndex h,
                          RandomStream& rng) {
    check_indices(env, a, h);
    return env.mean(a, h) + env.sigma() * rng.standard_normal();
}

}  // namespace elimtas
