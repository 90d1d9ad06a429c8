#include "aoismpc/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aoismpc/errors.hpp"

namespace aoismpc {
namespace {

using nlohmann::json;

class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

    bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

    Section at(const std::string& key) const {
        if (!j_.is_object()) throw ConfigError("config: '" + path_ + "' must be an object");
        if (!j_.contains(key)) throw ConfigError("config: missing field '" + child(key) + "'");
        return {j_.at(key), child(key)};
    }
    Section at(std::size_t i) const { return {j_.at(i), path_ + "[" + std::to_string(i) + "]"}; }

    const json& raw() const { return j_; }
    const std::string& path() const { return path_; }

    double number() const {
        if (!j_.is_number()) throw ConfigError("config: '" + path_ + "' must be a number");
        return j_.get<double>();
    }
    int integer() const {
        if (!j_.is_number_integer()) throw ConfigError("config: '" + path_ + "' must be an integer");
        return j_.get<int>();
    }
    std::string string() const {
        if (!j_.is_string()) throw ConfigError("config: '" + path_ + "' must be a string");
        return j_.get<std::string>();
    }
    std::size_t size() const {
        if (!j_.is_array()) throw ConfigError("config: '" + path_ + "' must be an array");
        return j_.size();
    }

    VectorXd vector() const {
        if (j_.is_number()) return VectorXd::Constant(1, j_.get<double>());
        VectorXd v(static_cast<Eigen::Index>(size()));
        for (std::size_t i = 0; i < j_.size(); ++i) v(static_cast<Eigen::Index>(i)) = at(i).number();
        return v;
    }

    // Row-major nested arrays; a bare number is a 1x1 matrix.
    MatrixXd matrix() const {
        if (j_.is_number()) return MatrixXd::Constant(1, 1, j_.get<double>());
        const std::size_t rows = size();
        if (rows == 0) throw ConfigError("config: '" + path_ + "' is an empty matrix");
        const std::size_t cols = at(0).size();
        MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (std::size_t i = 0; i < rows; ++i) {
            const Section row = at(i);
            if (row.size() != cols) throw ConfigError("config: '" + row.path() + "' has a ragged row");
            for (std::size_t c = 0; c < cols; ++c) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row.at(c).number();
            }
        }
        return m;
    }

    // A single matrix or a list of matrices.
    std::vector<MatrixXd> matrix_list() const {
        if (j_.is_array() && !j_.empty() && j_.at(0).is_array() && !j_.at(0).empty() && j_.at(0).at(0).is_array()) {
            std::vector<MatrixXd> out;
            for (std::size_t i = 0; i < j_.size(); ++i) out.push_back(at(i).matrix());
            return out;
        }
        return {matrix()};
    }

    // {"C": .., "b": ..} or {"lo": .., "hi": ..}
    Polytope polytope() const {
        if (has("lo") || has("hi")) return Polytope::box(at("lo").vector(), at("hi").vector());
        return {at("C").matrix(), at("b").vector()};
    }

private:
    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json& j_;
    std::string path_;
};

std::string location(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

AoiChain parse_channel(const Section& ch) {
    const std::string type = ch.has("type") ? ch.at("type").string() : "explicit";
    try {
        if (type == "one-link") return one_link_chain(ch.at("q").number(), ch.at("a_max").integer());
        if (type == "explicit") return AoiChain(ch.at("T").matrix(), ch.at("mu0").vector());
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError("config: invalid 'channel': " + std::string(e.what()));
    }
    throw ConfigError("config: 'channel.type' must be \"one-link\" or \"explicit\", got \"" + type + "\"");
}

ProblemSpec parse_problem(const Section& root, int horizon) {
    ProblemSpec spec;
    spec.horizon = horizon;
    const Section plant = root.at("plant");
    spec.plant.A = plant.at("A").matrix();
    spec.plant.B = plant.at("B").matrix();
    spec.plant.E = plant.at("E").matrix();

    const Section dist = root.at("disturbance");
    if (dist.has("covariances")) {
        spec.disturbance.covariances = dist.at("covariances").matrix_list();
    } else {
        spec.disturbance.covariances = {dist.at("covariance").matrix()};
    }
    spec.x0 = root.at("x0").vector();

    const Section cons = root.at("constraints");
    if (cons.has("state_sets")) {
        const Section sets = cons.at("state_sets");
        for (std::size_t i = 0; i < sets.size(); ++i) spec.state_sets.push_back(sets.at(i).polytope());
    } else {
        spec.state_sets = {cons.at("state").polytope()};
    }
    spec.input_set = cons.at("input").polytope();
    spec.delta_x = cons.at("delta_x").number();
    spec.delta_u = cons.at("delta_u").number();

    const Section w = root.at("weights");
    spec.weights.Q = w.at("Q").matrix_list();
    spec.weights.R = w.at("R").matrix_list();
    spec.weights.S = w.has("S") ? w.at("S").number() : 0.0;
    return spec;
}

SynthesisOptions parse_solver(const Section& root) {
    SynthesisOptions opt;
    if (!root.has("solver")) return opt;
    const Section s = root.at("solver");
    if (s.has("tol")) opt.solver.tol = s.at("tol").number();
    if (s.has("max_iter")) opt.solver.max_iter = s.at("max_iter").integer();
    if (s.has("beta_rule")) {
        const std::string rule = s.at("beta_rule").string();
        if (rule == "strict") {
            opt.beta_rule = BetaRule::Strict;
        } else if (rule == "adaptive") {
            opt.beta_rule = BetaRule::Adaptive;
        } else {
            throw ConfigError("config: 'solver.beta_rule' must be \"strict\" or \"adaptive\", got \"" + rule + "\"");
        }
    }
    if (!(opt.solver.tol > 0.0)) throw ConfigError("config: 'solver.tol' must be positive");
    if (opt.solver.max_iter <= 0) throw ConfigError("config: 'solver.max_iter' must be positive");
    return opt;
}

}  // namespace

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

RunConfig parse_config(const std::string& text, bool require_problem) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: syntax error at " + location(text, e.byte) + ": " + e.what());
    }
    RunConfig cfg;
    cfg.config_hash = fnv1a(text);
    try {
        const Section root(doc, "");
        cfg.horizon = root.at("horizon").integer();
        if (cfg.horizon < 1) throw ConfigError("config: 'horizon' must be at least 1");
        cfg.chain.emplace(parse_channel(root.at("channel")));
        cfg.options = parse_solver(root);
        if (require_problem) cfg.spec = parse_problem(root, cfg.horizon);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path, bool require_problem) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), require_problem);
}

}  // namespace aoismpc
