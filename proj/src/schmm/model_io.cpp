#include "hmmpc/schmm/model_io.hpp"

#include "hmmpc/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace hmmpc::schmm {

using nlohmann::json;

namespace {

std::vector<double> flatten(const Eigen::MatrixXd& m) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
    return out;
}

Eigen::MatrixXd unflatten(const std::vector<double>& v, int rows, int cols, const char* name) {
    if (static_cast<int>(v.size()) != rows * cols) {
        throw ParseError(0, std::string("model field '") + name + "' has " + std::to_string(v.size()) +
                                " entries, expected " + std::to_string(rows * cols));
    }
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = v[static_cast<std::size_t>(i * cols + j)];
    return m;
}

Eigen::VectorXd to_vector(const std::vector<double>& v, int n, const char* name) {
    return unflatten(v, n, 1, name);
}

}  // namespace

std::string model_to_string(const SchmmModel& m) {
    json j;
    j["n_states"] = m.n_states;
    j["n_mixtures"] = m.n_mixtures;
    j["pi"] = std::vector<double>(m.pi.data(), m.pi.data() + m.pi.size());
    j["trans"] = flatten(m.trans);
    j["mix"] = flatten(m.mix);
    j["mu"] = std::vector<double>(m.mu.data(), m.mu.data() + m.mu.size());
    j["sigma"] = std::vector<double>(m.sigma.data(), m.sigma.data() + m.sigma.size());
    j["mask"] = m.mask;
    return j.dump(2) + "\n";
}

SchmmModel model_from_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(0, std::string("model file is not valid JSON: ") + e.what());
    }
    SchmmModel m;
    try {
        m.n_states = j.at("n_states").get<int>();
        m.n_mixtures = j.at("n_mixtures").get<int>();
        if (m.n_states < 1 || m.n_mixtures < 2) throw ParseError(0, "model dimensions out of range");
        m.pi = to_vector(j.at("pi").get<std::vector<double>>(), m.n_states, "pi");
        m.trans = unflatten(j.at("trans").get<std::vector<double>>(), m.n_states, m.n_states, "trans");
        m.mix = unflatten(j.at("mix").get<std::vector<double>>(), m.n_states, m.n_mixtures, "mix");
        m.mu = to_vector(j.at("mu").get<std::vector<double>>(), m.n_mixtures, "mu");
        m.sigma = to_vector(j.at("sigma").get<std::vector<double>>(), m.n_mixtures, "sigma");
        m.mask = j.at("mask").get<double>();
    } catch (const json::exception& e) {
        throw ParseError(0, std::string("bad model file: ") + e.what());
    }
    m.validate();
    return m;
}

void save_model(const SchmmModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write model file " + path.string());
    out << model_to_string(model);
}

SchmmModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open model file " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return model_from_string(os.str());
}

}  // namespace hmmpc::schmm
