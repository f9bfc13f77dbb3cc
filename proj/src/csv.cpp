#include "slalom/csv.hpp"

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <vector>

namespace slalom {

namespace {

[[noreturn]] void fail(const std::string& path, std::size_t line,
                       const std::string& msg) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& path, std::size_t line,
                    const std::string& field) {
    double v = 0.0;
    const auto [p, ec] =
        std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || p != field.data() + field.size())
        fail(path, line, "bad number '" + field + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& path, std::size_t line,
                        const std::string& field) {
    std::uint64_t v = 0;
    const auto [p, ec] =
        std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || p != field.data() + field.size())
        fail(path, line, "bad integer '" + field + "'");
    return v;
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary); // "\n" endings everywhere
    if (!out) throw std::runtime_error("cannot write file: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    return in;
}

} // namespace

std::string format_double(double value) {
    std::array<char, 32> buf;
    const auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(),
                                       value);
    if (ec != std::errc())
        throw std::runtime_error("format_double: value does not format");
    return std::string(buf.data(), p);
}

void write_trace_csv(const RunTrace& trace, const std::string& path) {
    std::ofstream out = open_out(path);
    out << kTraceHeader << "\n";
    for (const TraceRow& row : trace.rows) {
        out << format_double(row.t) << ',' << format_double(row.state.x) << ','
            << format_double(row.state.y) << ','
            << format_double(row.state.heading) << ','
            << format_double(mps_to_kmh(row.state.speed)) << ','
            << format_double(row.state.wheel_angle) << ','
            << format_double(row.state.wheel_rate) << ','
            << format_double(row.torque) << ',' << (row.collision ? '1' : '0')
            << "\n";
    }
    if (!out) throw std::runtime_error("short write: " + path);
}

RunTrace read_trace_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    RunTrace trace;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) fail(path, 1, "empty file");
    ++line_no;
    if (split_row(line) != split_row(kTraceHeader))
        fail(path, 1, "unexpected header '" + line + "'");

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> f = split_row(line);
        if (f.size() != 9)
            fail(path, line_no,
                 "expected 9 fields, got " + std::to_string(f.size()));
        TraceRow row;
        row.t = parse_double(path, line_no, f[0]);
        row.state.x = parse_double(path, line_no, f[1]);
        row.state.y = parse_double(path, line_no, f[2]);
        row.state.heading = parse_double(path, line_no, f[3]);
        row.state.speed = kmh_to_mps(parse_double(path, line_no, f[4]));
        row.state.wheel_angle = parse_double(path, line_no, f[5]);
        row.state.wheel_rate = parse_double(path, line_no, f[6]);
        row.torque = parse_double(path, line_no, f[7]);
        if (f[8] != "0" && f[8] != "1")
            fail(path, line_no, "collision_flag must be 0 or 1");
        row.collision = f[8] == "1";
        trace.collided = trace.collided || row.collision;
        trace.rows.push_back(row);
    }
    if (trace.rows.size() >= 2)
        trace.dt = trace.rows[1].t - trace.rows[0].t;
    return trace;
}

void write_dataset_csv(const Dataset& dataset, const std::string& path) {
    std::ofstream out = open_out(path);
    out << kDatasetHeader << "\n";
    for (const Sample& s : dataset.samples) {
        out << s.run_id << ',' << format_double(s.t);
        for (double f : s.features) out << ',' << format_double(f);
        out << ',' << format_double(s.target_wheel_angle) << "\n";
    }
    if (!out) throw std::runtime_error("short write: " + path);
}

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    Dataset ds;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) fail(path, 1, "empty file");
    ++line_no;
    if (split_row(line) != split_row(kDatasetHeader))
        fail(path, 1, "unexpected header '" + line + "'");

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> f = split_row(line);
        if (f.size() != 10)
            fail(path, line_no,
                 "expected 10 fields, got " + std::to_string(f.size()));
        Sample s;
        s.run_id = parse_u64(path, line_no, f[0]);
        s.t = parse_double(path, line_no, f[1]);
        for (int i = 0; i < kNumFeatures; ++i)
            s.features[i] = parse_double(path, line_no, f[2 + i]);
        s.target_wheel_angle = parse_double(path, line_no, f[9]);
        ds.samples.push_back(s);
    }
    return ds;
}

} // namespace slalom
