#include "hmmpc/cli/config.hpp"

#include "hmmpc/error.hpp"
#include "hmmpc/netsim/trace_io.hpp"
#include "hmmpc/schmm/model_io.hpp"
#include "hmmpc/topology/dynamics.hpp"
#include "hmmpc/topology/graph.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hmmpc::cli {
namespace fs = std::filesystem;

namespace {

template <typename T>
T scalar(const YAML::Node& node, const std::string& field) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(field, "expected a " + std::string(std::is_same_v<T, bool> ? "boolean"
                                                             : std::is_same_v<T, std::string> ? "string"
                                                                                             : "number"));
    }
}

template <typename T>
void read(const YAML::Node& parent, const char* key, const std::string& field, T& out) {
    if (const YAML::Node n = parent[key]) out = scalar<T>(n, field);
}

/// A scalar s means s * I (size unknown yet, stored 1x1); otherwise a list of rows.
Eigen::MatrixXd matrix(const YAML::Node& node, const std::string& field) {
    if (node.IsScalar()) {
        Eigen::MatrixXd m(1, 1);
        m(0, 0) = scalar<double>(node, field);
        return m;
    }
    if (!node.IsSequence() || node.size() == 0) throw ConfigError(field, "expected a number or a list of rows");
    const auto rows = static_cast<Eigen::Index>(node.size());
    Eigen::Index cols = -1;
    Eigen::MatrixXd m;
    for (Eigen::Index r = 0; r < rows; ++r) {
        const YAML::Node row = node[static_cast<std::size_t>(r)];
        if (!row.IsSequence()) throw ConfigError(field, "row " + std::to_string(r) + " is not a list");
        if (cols < 0) {
            cols = static_cast<Eigen::Index>(row.size());
            m.resize(rows, cols);
        }
        if (static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError(field, "rows have different lengths");
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = scalar<double>(row[static_cast<std::size_t>(c)], field);
        }
    }
    return m;
}

Eigen::MatrixXd expand(const Eigen::MatrixXd& spec, int size, const std::string& field) {
    if (spec.size() == 0) return Eigen::MatrixXd::Identity(size, size);
    if (spec.rows() == 1 && spec.cols() == 1) return spec(0, 0) * Eigen::MatrixXd::Identity(size, size);
    if (spec.rows() != size || spec.cols() != size) {
        throw ConfigError(field, "expected " + std::to_string(size) + "x" + std::to_string(size));
    }
    return spec;
}

void emit_matrix(YAML::Emitter& out, const Eigen::MatrixXd& m) {
    if (m.rows() == 1 && m.cols() == 1) {
        out << netsim::format_number(m(0, 0));
        return;
    }
    out << YAML::BeginSeq;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        out << YAML::Flow << YAML::BeginSeq;
        for (Eigen::Index c = 0; c < m.cols(); ++c) out << netsim::format_number(m(r, c));
        out << YAML::EndSeq;
    }
    out << YAML::EndSeq;
}

bool same(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

fs::path resolve(const fs::path& base, const fs::path& p) {
    return p.empty() || p.is_absolute() ? p : base / p;
}

}  // namespace

bool SimConfig::operator==(const SimConfig& o) const {
    return graph == o.graph && dynamics.name == o.dynamics.name && dynamics.input_gain == o.dynamics.input_gain &&
           same(dynamics.A, o.dynamics.A) && same(dynamics.B, o.dynamics.B) &&
           dynamics.translational == o.dynamics.translational && same(weights.P, o.weights.P) &&
           same(weights.Q, o.weights.Q) && same(weights.P_v, o.weights.P_v) && weights.theta == o.weights.theta &&
           weights.N_max == o.weights.N_max && weights.v_ratio == o.weights.v_ratio &&
           weights.epsilon == o.weights.epsilon && weights.alpha0 == o.weights.alpha0 &&
           channel.kind == o.channel.kind && channel.model == o.channel.model && channel.trace == o.channel.trace &&
           channel.delay_ms == o.channel.delay_ms && agent_model == o.agent_model && eta == o.eta &&
           learn == o.learn && sample_period_ms == o.sample_period_ms && history_depth == o.history_depth &&
           mask == o.mask && steps == o.steps && seed == o.seed && snapshot_interval == o.snapshot_interval &&
           output == o.output;
}

SimConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("config", e.what());
    }
    if (!root.IsMap()) throw ConfigError("config", "expected a mapping at the top level");

    SimConfig c;
    std::string path;
    if (!root["graph"]) throw ConfigError("graph", "missing");
    read(root, "graph", "graph", path);
    c.graph = path;

    if (const YAML::Node d = root["dynamics"]) {
        if (d["A"] || d["B"]) {
            if (!d["A"] || !d["B"]) throw ConfigError("dynamics", "A and B must be given together");
            c.dynamics.name.clear();
            c.dynamics.A = matrix(d["A"], "dynamics.A");
            c.dynamics.B = matrix(d["B"], "dynamics.B");
            if (const YAML::Node t = d["translational"]) {
                if (!t.IsSequence()) throw ConfigError("dynamics.translational", "expected a list of indices");
                for (const auto& v : t) c.dynamics.translational.push_back(scalar<int>(v, "dynamics.translational"));
            }
        } else {
            read(d, "template", "dynamics.template", c.dynamics.name);
            if (c.dynamics.name != "double-integrator-3d") {
                throw ConfigError("dynamics.template", "unknown template '" + c.dynamics.name + "'");
            }
        }
        read(d, "input_gain", "dynamics.input_gain", c.dynamics.input_gain);
    }

    if (const YAML::Node w = root["weights"]) {
        if (w["P"]) c.weights.P = matrix(w["P"], "weights.P");
        if (w["Q"]) c.weights.Q = matrix(w["Q"], "weights.Q");
        if (const YAML::Node pv = w["P_v"]) {
            if (!(pv.IsScalar() && pv.Scalar() == "riccati")) c.weights.P_v = matrix(pv, "weights.P_v");
        }
        read(w, "theta", "weights.theta", c.weights.theta);
        read(w, "N_max", "weights.N_max", c.weights.N_max);
        read(w, "v_ratio", "weights.v_ratio", c.weights.v_ratio);
        read(w, "epsilon", "weights.epsilon", c.weights.epsilon);
        read(w, "alpha0", "weights.alpha0", c.weights.alpha0);
    }

    const YAML::Node ch = root["channel"];
    if (!ch) throw ConfigError("channel", "missing");
    std::string source = "model";
    read(ch, "source", "channel.source", source);
    if (source == "model") {
        c.channel.kind = ChannelKind::Model;
        if (!ch["model"]) throw ConfigError("channel.model", "missing");
        read(ch, "model", "channel.model", path);
        c.channel.model = path;
    } else if (source == "trace") {
        c.channel.kind = ChannelKind::Trace;
        if (!ch["trace"]) throw ConfigError("channel.trace", "missing");
        read(ch, "trace", "channel.trace", path);
        c.channel.trace = path;
    } else if (source == "constant") {
        c.channel.kind = ChannelKind::Constant;
        if (!ch["delay_ms"]) throw ConfigError("channel.delay_ms", "missing");
        read(ch, "delay_ms", "channel.delay_ms", c.channel.delay_ms);
    } else {
        throw ConfigError("channel.source", "expected model, trace or constant, got '" + source + "'");
    }

    if (!root["agent_model"]) throw ConfigError("agent_model", "missing");
    read(root, "agent_model", "agent_model", path);
    c.agent_model = path;

    read(root, "eta", "eta", c.eta);
    read(root, "learn", "learn", c.learn);
    read(root, "sample_period_ms", "sample_period_ms", c.sample_period_ms);
    read(root, "history_depth", "history_depth", c.history_depth);
    read(root, "mask", "mask", c.mask);
    if (root["steps"] && root["duration_s"]) throw ConfigError("steps", "give either steps or duration_s");
    read(root, "steps", "steps", c.steps);
    if (const YAML::Node d = root["duration_s"]) {
        const double seconds = scalar<double>(d, "duration_s");
        if (!(seconds > 0.0)) throw ConfigError("duration_s", "must be positive");
        c.steps = std::lround(seconds * 1000.0 / c.sample_period_ms);
    }
    read(root, "seed", "seed", c.seed);
    read(root, "snapshot_interval", "snapshot_interval", c.snapshot_interval);
    if (root["output"]) {
        read(root, "output", "output", path);
        c.output = path;
    }

    static const char* known[] = {"graph", "dynamics", "weights", "channel", "agent_model", "eta", "learn",
                                  "sample_period_ms", "history_depth", "mask", "steps", "duration_s", "seed",
                                  "snapshot_interval", "output"};
    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
            throw ConfigError(key, "unknown field");
        }
    }
    return c;
}

std::string format_config(const SimConfig& c) {
    using netsim::format_number;
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "graph" << YAML::Value << c.graph.string();

    out << YAML::Key << "dynamics" << YAML::Value << YAML::BeginMap;
    if (c.dynamics.name.empty()) {
        out << YAML::Key << "A" << YAML::Value;
        emit_matrix(out, c.dynamics.A);
        out << YAML::Key << "B" << YAML::Value;
        emit_matrix(out, c.dynamics.B);
        if (!c.dynamics.translational.empty()) {
            out << YAML::Key << "translational" << YAML::Value << YAML::Flow << c.dynamics.translational;
        }
    } else {
        out << YAML::Key << "template" << YAML::Value << c.dynamics.name;
    }
    out << YAML::Key << "input_gain" << YAML::Value << format_number(c.dynamics.input_gain);
    out << YAML::EndMap;

    out << YAML::Key << "weights" << YAML::Value << YAML::BeginMap;
    if (c.weights.P.size()) {
        out << YAML::Key << "P" << YAML::Value;
        emit_matrix(out, c.weights.P);
    }
    if (c.weights.Q.size()) {
        out << YAML::Key << "Q" << YAML::Value;
        emit_matrix(out, c.weights.Q);
    }
    out << YAML::Key << "P_v" << YAML::Value;
    if (c.weights.P_v.size()) {
        emit_matrix(out, c.weights.P_v);
    } else {
        out << "riccati";
    }
    out << YAML::Key << "theta" << YAML::Value << format_number(c.weights.theta);
    out << YAML::Key << "N_max" << YAML::Value << c.weights.N_max;
    out << YAML::Key << "v_ratio" << YAML::Value << format_number(c.weights.v_ratio);
    out << YAML::Key << "epsilon" << YAML::Value << format_number(c.weights.epsilon);
    out << YAML::Key << "alpha0" << YAML::Value << format_number(c.weights.alpha0);
    out << YAML::EndMap;

    out << YAML::Key << "channel" << YAML::Value << YAML::BeginMap;
    switch (c.channel.kind) {
    case ChannelKind::Model:
        out << YAML::Key << "source" << YAML::Value << "model";
        out << YAML::Key << "model" << YAML::Value << c.channel.model.string();
        break;
    case ChannelKind::Trace:
        out << YAML::Key << "source" << YAML::Value << "trace";
        out << YAML::Key << "trace" << YAML::Value << c.channel.trace.string();
        break;
    case ChannelKind::Constant:
        out << YAML::Key << "source" << YAML::Value << "constant";
        out << YAML::Key << "delay_ms" << YAML::Value << format_number(c.channel.delay_ms);
        break;
    }
    out << YAML::EndMap;

    out << YAML::Key << "agent_model" << YAML::Value << c.agent_model.string();
    out << YAML::Key << "eta" << YAML::Value << format_number(c.eta);
    out << YAML::Key << "learn" << YAML::Value << c.learn;
    out << YAML::Key << "sample_period_ms" << YAML::Value << format_number(c.sample_period_ms);
    out << YAML::Key << "history_depth" << YAML::Value << c.history_depth;
    out << YAML::Key << "mask" << YAML::Value << format_number(c.mask);
    out << YAML::Key << "steps" << YAML::Value << c.steps;
    out << YAML::Key << "seed" << YAML::Value << c.seed;
    out << YAML::Key << "snapshot_interval" << YAML::Value << c.snapshot_interval;
    out << YAML::Key << "output" << YAML::Value << c.output.string();
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

SimConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    SimConfig c = parse_config(text.str());
    const fs::path base = path.parent_path();
    c.graph = resolve(base, c.graph);
    c.channel.model = resolve(base, c.channel.model);
    c.channel.trace = resolve(base, c.channel.trace);
    c.agent_model = resolve(base, c.agent_model);
    c.output = resolve(base, c.output);
    return c;
}

void validate_config(const SimConfig& c) {
    auto need_file = [](const fs::path& p, const std::string& field) {
        if (!fs::is_regular_file(p)) throw ConfigError(field, "file not found: " + p.string());
    };
    need_file(c.graph, "graph");
    need_file(c.agent_model, "agent_model");
    if (c.channel.kind == ChannelKind::Model) need_file(c.channel.model, "channel.model");
    if (c.channel.kind == ChannelKind::Trace) need_file(c.channel.trace, "channel.trace");
    if (c.channel.kind == ChannelKind::Constant && !(c.channel.delay_ms >= 0.0)) {
        throw ConfigError("channel.delay_ms", "must be non-negative");
    }
    if (!(c.weights.theta > 0.0 && c.weights.theta < 1.0)) throw ConfigError("weights.theta", "must lie in (0, 1)");
    if (c.weights.N_max < 1) throw ConfigError("weights.N_max", "must be at least 1");
    if (!(c.weights.v_ratio > 0.0 && c.weights.v_ratio < 1.0)) throw ConfigError("weights.v_ratio", "must lie in (0, 1)");
    if (!(c.weights.epsilon > 0.0)) throw ConfigError("weights.epsilon", "must be positive");
    if (!(c.weights.alpha0 > 0.0)) throw ConfigError("weights.alpha0", "must be positive");
    if (!(c.eta >= 0.0 && c.eta <= 1.0)) throw ConfigError("eta", "must lie in [0, 1]");
    if (!(c.sample_period_ms > 0.0)) throw ConfigError("sample_period_ms", "must be positive");
    if (c.history_depth < 1) throw ConfigError("history_depth", "must be at least 1");
    if (!(c.mask > 0.0)) throw ConfigError("mask", "must be positive");
    if (c.steps < 1) throw ConfigError("steps", "must be at least 1");
    if (c.snapshot_interval < 0) throw ConfigError("snapshot_interval", "must be non-negative");
    if (!(c.dynamics.input_gain > 0.0)) throw ConfigError("dynamics.input_gain", "must be positive");
}

runtime::Scenario build_scenario(const SimConfig& c) {
    validate_config(c);
    runtime::Scenario s;
    try {
        s.topology = topology::load_graph(c.graph);
    } catch (const Error& e) {
        throw ConfigError("graph", e.what());
    }
    const int N = s.topology.n_agents();

    topology::AgentDynamics dyn;
    if (c.dynamics.name.empty()) {
        dyn.A = c.dynamics.A;
        dyn.B = c.dynamics.B;
        dyn.translational = c.dynamics.translational;
        try {
            dyn.validate();
        } catch (const Error& e) {
            throw ConfigError("dynamics", e.what());
        }
    } else {
        dyn = topology::double_integrator_3d(c.sample_period_ms / 1000.0, c.dynamics.input_gain);
    }
    s.dynamics.assign(static_cast<std::size_t>(N), dyn);

    s.weights = lmpc::CostWeights::defaults(dyn.n(), dyn.m());
    s.weights.P = expand(c.weights.P, dyn.n(), "weights.P");
    s.weights.Q = expand(c.weights.Q, dyn.m(), "weights.Q");
    if (c.weights.P_v.size()) {
        s.weights.lyapunov = lmpc::LyapunovWeight::Fixed;
        s.weights.P_v = expand(c.weights.P_v, dyn.n() * N, "weights.P_v");
    }
    s.weights.N_max = c.weights.N_max;
    s.weights.v_ratio = c.weights.v_ratio;
    s.weights.epsilon = c.weights.epsilon;
    s.weights.alpha0 = c.weights.alpha0;
    s.theta = c.weights.theta;

    try {
        s.agent_model = schmm::load_model(c.agent_model);
    } catch (const Error& e) {
        throw ConfigError("agent_model", e.what());
    }
    switch (c.channel.kind) {
    case ChannelKind::Model:
        try {
            s.channel = netsim::model_sampler(schmm::load_model(c.channel.model), c.seed);
        } catch (const Error& e) {
            throw ConfigError("channel.model", e.what());
        }
        break;
    case ChannelKind::Trace:
        try {
            s.channel = netsim::trace_replay(netsim::load_trace(c.channel.trace, c.mask), c.seed);
        } catch (const Error& e) {
            throw ConfigError("channel.trace", e.what());
        }
        break;
    case ChannelKind::Constant:
        s.channel = netsim::constant_delay(c.channel.delay_ms);
        break;
    }

    s.runtime.sample_period_ms = c.sample_period_ms;
    s.runtime.history_depth = c.history_depth;
    s.runtime.eta = c.eta;
    s.runtime.learn = c.learn;
    s.runtime.N_max = c.weights.N_max;
    s.runtime.v_ratio = c.weights.v_ratio;
    s.mask = c.mask;
    s.steps = c.steps;
    s.seed = c.seed;
    s.snapshot_interval = c.snapshot_interval;
    return s;
}

}  // namespace hmmpc::cli
