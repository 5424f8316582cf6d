#pragma once

// CSV point input and coreset files (binary TCS1 or CSV).
//
// TCS1 layout, all little-endian:
//   "TCS1" | u32 version | u64 n | u64 m | u64 d | f64 delta | f64 eps |
//   u64 seed | u16 len, kind bytes | u16 len, construction bytes |
//   m rows of (d f64 coordinates, f64 weight)

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tinycore/coreset.hpp"

namespace tinycore {

struct CsvOptions {
    bool header = false;    // skip the first line
    bool weighted = false;  // last column is the weight
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline std::string line_error(std::int64_t line, const std::string& what) {
    return "line " + std::to_string(line) + ": " + what;
}

}  // namespace detail

inline bool blank_line(std::string_view line) {
    line = detail::trim(line);
    return line.empty() || line.front() == '#';
}

// Comma-separated numbers of one line; throws InvalidInput naming the line.
inline std::vector<double> parse_csv_fields(std::string_view line, std::int64_t line_no) {
    std::vector<double> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        const std::string_view field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        double v = 0.0;
        if (!detail::parse_double(field, v))
            throw InvalidInput(detail::line_error(line_no, "cannot parse '" + std::string(detail::trim(field)) + "' as a number"));
        if (!std::isfinite(v)) throw InvalidInput(detail::line_error(line_no, "non-finite value"));
        out.push_back(v);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

// One parsed row; `expected` is the column count fixed by the first row (0 = unknown).
struct CsvRow {
    Vector point;
    double weight = 1.0;
};

inline CsvRow parse_csv_row(std::string_view line, std::int64_t line_no, std::size_t expected, bool weighted) {
    std::vector<double> f = parse_csv_fields(line, line_no);
    if (expected != 0 && f.size() != expected)
        throw InvalidInput(detail::line_error(line_no, "expected " + std::to_string(expected) + " columns, found " +
                                                           std::to_string(f.size())));
    CsvRow row;
    if (weighted) {
        if (f.size() < 2) throw InvalidInput(detail::line_error(line_no, "weighted rows need a coordinate and a weight"));
        row.weight = f.back();
        if (row.weight < 0.0) throw InvalidInput(detail::line_error(line_no, "negative weight"));
        f.pop_back();
    }
    row.point = Eigen::Map<const Vector>(f.data(), static_cast<Index>(f.size()));
    return row;
}

inline PointSet read_points_csv(std::istream& in, const CsvOptions& opt = {}) {
    std::string line;
    std::int64_t line_no = 0;
    std::size_t cols = 0;
    std::vector<CsvRow> rows;
    if (opt.header && std::getline(in, line)) ++line_no;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank_line(line)) continue;
        CsvRow r = parse_csv_row(line, line_no, cols, opt.weighted);
        if (cols == 0) cols = static_cast<std::size_t>(r.point.size()) + (opt.weighted ? 1 : 0);
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw InvalidInput("empty input");
    const Index d = rows.front().point.size();
    Matrix a(static_cast<Index>(rows.size()), d);
    Vector w(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        a.row(static_cast<Index>(i)) = rows[i].point.transpose();
        w(static_cast<Index>(i)) = rows[i].weight;
    }
    if (opt.weighted) return PointSet(std::move(a), std::move(w));
    return PointSet(std::move(a));
}

inline PointSet read_points_csv(const std::string& path, const CsvOptions& opt = {}) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    return read_points_csv(in, opt);
}

inline void write_points_csv(std::ostream& out, const PointSet& points, bool with_weights) {
    char buf[32];
    for (Index i = 0; i < points.size(); ++i) {
        for (Index j = 0; j < points.dim(); ++j) {
            const auto res = std::to_chars(buf, buf + sizeof buf, points.rows()(i, j));
            if (j) out << ',';
            out.write(buf, res.ptr - buf);
        }
        if (with_weights) {
            const auto res = std::to_chars(buf, buf + sizeof buf, points.weight(i));
            out << ',';
            out.write(buf, res.ptr - buf);
        }
        out << '\n';
    }
}

struct CoresetHeader {
    std::uint32_t version = 1;
    std::uint64_t n = 0;  // points summarized
    double eps = 0.0;
    std::uint64_t seed = 0;
    std::string kind;          // kmeans | subspace | affine
    std::string construction;  // e.g. kmeans, small-kmeans, stream-subspace
};

struct CoresetFile {
    CoresetHeader header;
    Coreset coreset;

    bool streamed() const { return header.construction.rfind("stream", 0) == 0; }
};

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}
inline void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 4);
}
inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
inline void put_str(std::ostream& out, const std::string& s) {
    require(s.size() < 65536, "coreset file: string field too long");
    const auto len = static_cast<std::uint16_t>(s.size());
    const char b[2] = {static_cast<char>(len & 0xff), static_cast<char>(len >> 8)};
    out.write(b, 2);
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void get_bytes(std::istream& in, char* b, std::size_t n) {
    in.read(b, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) throw InvalidInput("coreset file: truncated");
}
inline std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    get_bytes(in, reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}
inline std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    get_bytes(in, reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}
inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }
inline std::string get_str(std::istream& in) {
    unsigned char b[2];
    get_bytes(in, reinterpret_cast<char*>(b), 2);
    std::string s(static_cast<std::size_t>(b[0] | (b[1] << 8)), '\0');
    if (!s.empty()) get_bytes(in, s.data(), s.size());
    return s;
}

}  // namespace detail

inline constexpr char kMagic[4] = {'T', 'C', 'S', '1'};

inline void write_coreset_binary(std::ostream& out, const CoresetFile& f) {
    const Coreset& c = f.coreset;
    out.write(kMagic, 4);
    detail::put_u32(out, f.header.version);
    detail::put_u64(out, f.header.n);
    detail::put_u64(out, static_cast<std::uint64_t>(c.size()));
    detail::put_u64(out, static_cast<std::uint64_t>(c.dim()));
    detail::put_f64(out, c.delta);
    detail::put_f64(out, f.header.eps);
    detail::put_u64(out, f.header.seed);
    detail::put_str(out, f.header.kind);
    detail::put_str(out, f.header.construction);
    for (Index i = 0; i < c.size(); ++i) {
        for (Index j = 0; j < c.dim(); ++j) detail::put_f64(out, c.points(i, j));
        detail::put_f64(out, c.weights(i));
    }
}

inline CoresetFile read_coreset_binary(std::istream& in) {
    char magic[4];
    detail::get_bytes(in, magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw InvalidInput("coreset file: bad magic");
    CoresetFile f;
    f.header.version = detail::get_u32(in);
    if (f.header.version != 1) throw InvalidInput("coreset file: unsupported version " + std::to_string(f.header.version));
    f.header.n = detail::get_u64(in);
    const std::uint64_t m = detail::get_u64(in);
    const std::uint64_t d = detail::get_u64(in);
    const double delta = detail::get_f64(in);
    f.header.eps = detail::get_f64(in);
    f.header.seed = detail::get_u64(in);
    f.header.kind = detail::get_str(in);
    f.header.construction = detail::get_str(in);
    if (m == 0 || d == 0 || m > (std::uint64_t{1} << 40) || d > (std::uint64_t{1} << 24))
        throw InvalidInput("coreset file: implausible dimensions");
    Matrix s(static_cast<Index>(m), static_cast<Index>(d));
    Vector w(static_cast<Index>(m));
    for (Index i = 0; i < s.rows(); ++i) {
        for (Index j = 0; j < s.cols(); ++j) s(i, j) = detail::get_f64(in);
        w(i) = detail::get_f64(in);
    }
    f.coreset = Coreset(std::move(s), std::move(w), delta);
    return f;
}

// CSV form: "# key=value" header lines, then one row per point with its weight last.
inline void write_coreset_csv(std::ostream& out, const CoresetFile& f) {
    char buf[32];
    auto num = [&](double v) {
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, res.ptr);
    };
    out << "# format=tinycore-coreset\n";
    out << "# version=" << f.header.version << '\n';
    out << "# n=" << f.header.n << '\n';
    out << "# m=" << f.coreset.size() << '\n';
    out << "# d=" << f.coreset.dim() << '\n';
    out << "# delta=" << num(f.coreset.delta) << '\n';
    out << "# eps=" << num(f.header.eps) << '\n';
    out << "# seed=" << f.header.seed << '\n';
    out << "# kind=" << f.header.kind << '\n';
    out << "# construction=" << f.header.construction << '\n';
    write_points_csv(out, f.coreset.as_point_set(), true);
}

inline CoresetFile read_coreset_csv(std::istream& in) {
    CoresetFile f;
    double delta = 0.0;
    std::int64_t m = -1;
    std::string line;
    std::int64_t line_no = 0;
    std::vector<CsvRow> rows;
    std::size_t cols = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view v = detail::trim(line);
        if (v.empty()) continue;
        if (v.front() == '#') {
            v.remove_prefix(1);
            v = detail::trim(v);
            const std::size_t eq = v.find('=');
            if (eq == std::string_view::npos) continue;
            const std::string key(v.substr(0, eq));
            const std::string val(v.substr(eq + 1));
            try {
                if (key == "version") f.header.version = static_cast<std::uint32_t>(std::stoul(val));
                else if (key == "n") f.header.n = std::stoull(val);
                else if (key == "m") m = std::stoll(val);
                else if (key == "delta") {
                    if (!detail::parse_double(val, delta)) throw InvalidInput("bad delta");
                } else if (key == "eps") {
                    if (!detail::parse_double(val, f.header.eps)) throw InvalidInput("bad eps");
                } else if (key == "seed") f.header.seed = std::stoull(val);
                else if (key == "kind") f.header.kind = val;
                else if (key == "construction") f.header.construction = val;
            } catch (const std::exception&) {
                throw InvalidInput(detail::line_error(line_no, "malformed header field '" + key + "'"));
            }
            continue;
        }
        CsvRow r = parse_csv_row(v, line_no, cols, true);
        if (cols == 0) cols = static_cast<std::size_t>(r.point.size()) + 1;
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw InvalidInput("empty input");
    if (m >= 0 && static_cast<std::size_t>(m) != rows.size())
        throw InvalidInput("coreset file: header m does not match the row count");
    Matrix s(static_cast<Index>(rows.size()), rows.front().point.size());
    Vector w(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        s.row(static_cast<Index>(i)) = rows[i].point.transpose();
        w(static_cast<Index>(i)) = rows[i].weight;
    }
    f.coreset = Coreset(std::move(s), std::move(w), delta);
    return f;
}

inline void write_coreset(const std::string& path, const CoresetFile& f, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw InvalidInput("cannot write " + path);
    if (binary) write_coreset_binary(out, f);
    else write_coreset_csv(out, f);
    if (!out) throw InvalidInput("write failed for " + path);
}

// Detects the format from the first bytes.
inline CoresetFile read_coreset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open " + path);
    char magic[4] = {};
    in.read(magic, 4);
    const bool binary = in.gcount() == 4 && std::memcmp(magic, kMagic, 4) == 0;
    in.clear();
    in.seekg(0);
    return binary ? read_coreset_binary(in) : read_coreset_csv(in);
}

}  // namespace tinycore
