#include "hmmpc/runtime/result_io.hpp"

#include "hmmpc/error.hpp"
#include "hmmpc/lmpc/gain.hpp"
#include "hmmpc/netsim/trace_io.hpp"
#include "hmmpc/schmm/model_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace hmmpc::runtime {
namespace fs = std::filesystem;

using netsim::format_number;

namespace {

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    return out;
}

void write_vector_rows(const fs::path& p, const char* prefix, const std::vector<std::vector<Eigen::VectorXd>>& rows) {
    auto out = open_out(p);
    const Eigen::Index width = rows.empty() || rows.front().empty() ? 0 : rows.front().front().size();
    out << "step,agent";
    for (Eigen::Index c = 0; c < width; ++c) out << ',' << prefix << c;
    out << '\n';
    for (std::size_t k = 0; k < rows.size(); ++k) {
        for (std::size_t i = 0; i < rows[k].size(); ++i) {
            out << k << ',' << i;
            for (Eigen::Index c = 0; c < rows[k][i].size(); ++c) out << ',' << format_number(rows[k][i][c]);
            out << '\n';
        }
    }
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double to_double(const std::string& s, const fs::path& file, int line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError(line, file.filename().string() + ": bad number '" + s + "'");
    }
    return v;
}

long to_long(const std::string& s, const fs::path& file, int line) {
    long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError(line, file.filename().string() + ": bad integer '" + s + "'");
    }
    return v;
}

// Calls fn(cells, line_number) for every data row of a CSV with a header.
template <typename Fn>
void for_each_row(const fs::path& p, std::size_t min_cells, Fn fn) {
    std::ifstream in(p);
    if (!in) throw Error("missing " + p.string());
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (no == 1 || line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() < min_cells) throw ParseError(no, p.filename().string() + ": too few columns");
        fn(cells, no);
    }
}

template <typename T>
T& at_grow(std::vector<std::vector<T>>& v, long k, long i) {
    if (static_cast<long>(v.size()) <= k) v.resize(static_cast<std::size_t>(k + 1));
    auto& row = v[static_cast<std::size_t>(k)];
    if (static_cast<long>(row.size()) <= i) row.resize(static_cast<std::size_t>(i + 1));
    return row[static_cast<std::size_t>(i)];
}

std::pair<int, int> parse_link(const std::string& s, const fs::path& file, int line) {
    const auto arrow = s.find("->");
    if (arrow == std::string::npos) throw ParseError(line, file.filename().string() + ": bad link '" + s + "'");
    return {static_cast<int>(to_long(s.substr(0, arrow), file, line)),
            static_cast<int>(to_long(s.substr(arrow + 2), file, line))};
}

}  // namespace

void write_result(const SimResult& r, const fs::path& dir) {
    fs::create_directories(dir / "models");

    write_vector_rows(dir / "states.csv", "x", r.states);
    write_vector_rows(dir / "inputs.csv", "u", r.inputs);

    {
        auto out = open_out(dir / "errors.csv");
        out << "step,agent,error_norm,V,alpha,J,horizon\n";
        for (std::size_t k = 0; k < r.error_norm.size(); ++k) {
            for (std::size_t i = 0; i < r.error_norm[k].size(); ++i) {
                out << k << ',' << i << ',' << format_number(r.error_norm[k][i]) << ',' << format_number(r.V[k][i])
                    << ',' << format_number(r.alpha[k][i]) << ',' << format_number(r.J[k][i]) << ','
                    << r.horizon[k][i] << '\n';
            }
        }
    }
    {
        auto out = open_out(dir / "delta_max.csv");
        out << "step,delta_max\n";
        for (std::size_t k = 0; k < r.delta_max.size(); ++k) out << k << ',' << format_number(r.delta_max[k]) << '\n';
    }
    {
        auto out = open_out(dir / "delays.csv");
        out << "step,link,predicted,realized,dropped\n";
        for (const auto& d : r.delays) {
            out << d.send_step << ',' << d.sender << "->" << d.receiver << ','
                << (d.predicted_ms ? format_number(*d.predicted_ms) : std::string()) << ','
                << format_number(d.realized_ms) << ',' << (d.dropped ? 1 : 0) << '\n';
        }
    }
    {
        auto out = open_out(dir / "channel.csv");
        out << "step,link,sent,delivered,dropped\n" << r.channel_stats_csv;
    }
    {
        auto out = open_out(dir / "gains.txt");
        for (std::size_t i = 0; i < r.gains.size(); ++i) out << lmpc::format_certificate(static_cast<int>(i), *r.gains[i]) << '\n';
    }
    {
        auto out = open_out(dir / "run.txt");
        out << "agents " << r.n_agents << "\nsteps " << r.steps << "\nsample_period_ms "
            << format_number(r.sample_period_ms) << "\ntranslational";
        for (int c : r.translational) out << ' ' << c;
        out << '\n';
    }
    {
        auto out = open_out(dir / "warnings.txt");
        for (const auto& w : r.warnings) out << w << '\n';
    }
    for (const auto& s : r.snapshots) {
        const std::string name = "agent" + std::to_string(s.agent) + "_neighbor" + std::to_string(s.neighbor) + "_step" +
                                 std::to_string(s.step) + ".model";
        schmm::save_model(s.model, dir / "models" / name);
    }
}

SimResult read_result(const fs::path& dir) {
    if (!fs::exists(dir / "errors.csv")) throw Error("no simulation output in " + dir.string());
    SimResult r;

    for_each_row(dir / "errors.csv", 7, [&](const std::vector<std::string>& c, int no) {
        const fs::path f = dir / "errors.csv";
        const long k = to_long(c[0], f, no);
        const long i = to_long(c[1], f, no);
        at_grow(r.error_norm, k, i) = to_double(c[2], f, no);
        at_grow(r.V, k, i) = to_double(c[3], f, no);
        at_grow(r.alpha, k, i) = to_double(c[4], f, no);
        at_grow(r.J, k, i) = to_double(c[5], f, no);
        at_grow(r.horizon, k, i) = static_cast<int>(to_long(c[6], f, no));
    });
    if (r.error_norm.empty()) throw Error("simulation output in " + dir.string() + " is empty");

    for_each_row(dir / "states.csv", 3, [&](const std::vector<std::string>& c, int no) {
        const fs::path f = dir / "states.csv";
        Eigen::VectorXd x(static_cast<Eigen::Index>(c.size() - 2));
        for (std::size_t j = 2; j < c.size(); ++j) x[static_cast<Eigen::Index>(j - 2)] = to_double(c[j], f, no);
        at_grow(r.states, to_long(c[0], f, no), to_long(c[1], f, no)) = x;
    });

    for_each_row(dir / "delta_max.csv", 2, [&](const std::vector<std::string>& c, int no) {
        const fs::path f = dir / "delta_max.csv";
        const long k = to_long(c[0], f, no);
        if (static_cast<long>(r.delta_max.size()) <= k) r.delta_max.resize(static_cast<std::size_t>(k + 1));
        r.delta_max[static_cast<std::size_t>(k)] = to_double(c[1], f, no);
    });

    for_each_row(dir / "delays.csv", 5, [&](const std::vector<std::string>& c, int no) {
        const fs::path f = dir / "delays.csv";
        DelayRecord d;
        d.send_step = to_long(c[0], f, no);
        std::tie(d.sender, d.receiver) = parse_link(c[1], f, no);
        if (!c[2].empty()) d.predicted_ms = to_double(c[2], f, no);
        d.realized_ms = to_double(c[3], f, no);
        d.dropped = c[4] == "1";
        r.delays.push_back(d);
    });

    r.steps = static_cast<long>(r.error_norm.size());
    r.n_agents = static_cast<int>(r.error_norm.front().size());
    if (std::ifstream meta(dir / "run.txt"); meta) {
        std::string line;
        while (std::getline(meta, line)) {
            std::istringstream in(line);
            std::string key;
            in >> key;
            if (key == "sample_period_ms") {
                in >> r.sample_period_ms;
            } else if (key == "translational") {
                for (int c; in >> c;) r.translational.push_back(c);
            }
        }
    }
    return r;
}

}  // namespace hmmpc::runtime
