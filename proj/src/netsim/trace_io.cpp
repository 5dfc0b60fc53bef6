#include "hmmpc/netsim/trace_io.hpp"

#include "hmmpc/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace hmmpc::netsim {

std::string format_number(double value) {
    char buf[512];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
    if (res.ec != std::errc{}) {
        const auto sci = std::to_chars(buf, buf + sizeof(buf), value);
        return std::string(buf, sci.ptr);
    }
    return std::string(buf, res.ptr);
}

schmm::DelayTrace parse_trace(const std::string& text, double mask) {
    schmm::DelayTrace trace;
    trace.mask = mask;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        ++line_no;
        std::string_view line(text.data() + pos, end - pos);
        pos = end + 1;

        while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) line.remove_suffix(1);
        if (line.empty() || line.front() == '#') {
            if (end == text.size()) break;
            continue;
        }

        double value = 0.0;
        const auto res = std::from_chars(line.data(), line.data() + line.size(), value);
        if (res.ec != std::errc{} || res.ptr != line.data() + line.size()) {
            throw ParseError(line_no, "not a delay value: '" + std::string(line) + "'");
        }
        if (!(value == mask || (value > 0.0 && value < mask))) {
            throw ParseError(line_no, "delay " + std::string(line) + " is outside (0, mask) and is not the mask");
        }
        trace.samples.push_back(value);
        if (end == text.size()) break;
    }
    return trace;
}

std::string format_trace(const schmm::DelayTrace& trace) {
    std::string out = "# delay_ms (dropout = " + format_number(trace.mask) + ")\n";
    out.reserve(out.size() + trace.size() * 12);
    for (double s : trace.samples) {
        out += format_number(s);
        out += '\n';
    }
    return out;
}

schmm::DelayTrace load_trace(const std::filesystem::path& path, double mask) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open trace file " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return parse_trace(os.str(), mask);
}

void save_trace(const schmm::DelayTrace& trace, const std::filesystem::path& path) {
    trace.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write trace file " + path.string());
    out << format_trace(trace);
}

}  // namespace hmmpc::netsim
