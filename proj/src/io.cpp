#include "morse/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

namespace morse::io {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void CsvWriter::header(std::initializer_list<const char*> names) {
    for (const char* n : names) field(std::string(n));
    end_row();
}

void CsvWriter::separator() {
    if (!first_) out_ << ',';
    first_ = false;
}

CsvWriter& CsvWriter::field(double v) {
    separator();
    out_ << format_double(v);
    return *this;
}

CsvWriter& CsvWriter::field(long long v) {
    separator();
    out_ << v;
    return *this;
}

CsvWriter& CsvWriter::field(const std::string& v) {
    separator();
    out_ << csv_escape(v);
    return *this;
}

void CsvWriter::end_row() {
    out_ << '\n';
    first_ = true;
}

namespace {

void require_size(std::size_t width, std::size_t height, std::size_t pixels) {
    if (width * height != pixels) throw IoError("pgm: pixel count does not match the image size");
}

void require_written(const std::ostream& out) {
    if (!out) throw IoError("pgm: write failed");
}

}  // namespace

void write_pgm16(std::ostream& out, std::size_t width, std::size_t height,
                 const std::vector<std::uint16_t>& pixels) {
    require_size(width, height, pixels.size());
    out << "P5\n" << width << ' ' << height << "\n65535\n";
    std::vector<char> bytes(pixels.size() * 2);
    for (std::size_t k = 0; k < pixels.size(); ++k) {
        bytes[2 * k] = static_cast<char>(pixels[k] >> 8);
        bytes[2 * k + 1] = static_cast<char>(pixels[k] & 0xff);
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    require_written(out);
}

void write_pgm8(std::ostream& out, std::size_t width, std::size_t height,
                const std::vector<std::uint8_t>& pixels) {
    require_size(width, height, pixels.size());
    out << "P5\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
    require_written(out);
}

std::vector<std::uint16_t> field_pixels(const ScalarField& field) {
    const std::size_t nq = field.grid.nq, np = field.grid.np;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t k = 0; k < field.values.size(); ++k) {
        if (field.flags[k] != CellStatus::Ok || !std::isfinite(field.values[k])) continue;
        lo = std::min(lo, field.values[k]);
        hi = std::max(hi, field.values[k]);
    }
    std::vector<std::uint16_t> px(nq * np, 0);
    const double range = hi - lo;
    for (std::size_t row = 0; row < np; ++row) {
        const std::size_t j = np - 1 - row;
        for (std::size_t i = 0; i < nq; ++i) {
            const std::size_t k = field.index(i, j);
            if (field.flags[k] != CellStatus::Ok || !std::isfinite(field.values[k])) continue;
            const double x = range > 0.0 ? (field.values[k] - lo) / range : 0.0;
            px[row * nq + i] = static_cast<std::uint16_t>(std::lround(x * 65535.0));
        }
    }
    return px;
}

std::vector<std::uint8_t> field_mask(const ScalarField& field) {
    const std::size_t nq = field.grid.nq, np = field.grid.np;
    std::vector<std::uint8_t> px(nq * np, 0);
    for (std::size_t row = 0; row < np; ++row)
        for (std::size_t i = 0; i < nq; ++i)
            if (field.flagged(i, np - 1 - row)) px[row * nq + i] = 255;
    return px;
}

void write_field_csv(std::ostream& out, const ScalarField& field) {
    CsvWriter csv(out);
    csv.header({"q", "p", "value", "flag"});
    for (std::size_t j = 0; j < field.grid.np; ++j)
        for (std::size_t i = 0; i < field.grid.nq; ++i) {
            csv.field(cell_q(field.grid, i))
                .field(cell_p(field.grid, j))
                .field(field.at(i, j))
                .field(static_cast<long long>(field.flags[field.index(i, j)]));
            csv.end_row();
        }
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output file " + path.string());
    return out;
}

}  // namespace morse::io
