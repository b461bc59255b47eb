#pragma once

// Output formats: CSV with 17 significant digits and binary 16-bit PGM.

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "morse/descriptors.hpp"

namespace morse::io {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shortest-safe round-trip text for a double: 17 significant digits, '.' decimal.
std::string format_double(double v);

// Minimal RFC-4180-style writer: header row, comma separated, fields quoted
// only when they contain a comma, quote or newline.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void header(std::initializer_list<const char*> names);
    CsvWriter& field(double v);
    CsvWriter& field(long long v);
    CsvWriter& field(const std::string& v);
    void end_row();

private:
    void separator();
    std::ostream& out_;
    bool first_ = true;
};

std::string csv_escape(const std::string& s);

// Binary P5 image, maxval 65535, big-endian samples, row-major from the top row.
void write_pgm16(std::ostream& out, std::size_t width, std::size_t height,
                 const std::vector<std::uint16_t>& pixels);

// Binary P5 image, maxval 255.
void write_pgm8(std::ostream& out, std::size_t width, std::size_t height,
                const std::vector<std::uint8_t>& pixels);

// Image of a field: q along columns, p increasing upwards. Unflagged values
// map linearly min -> 0, max -> 65535; flagged cells -> 0.
std::vector<std::uint16_t> field_pixels(const ScalarField& field);

// 255 where the cell is flagged, 0 elsewhere, same orientation as field_pixels.
std::vector<std::uint8_t> field_mask(const ScalarField& field);

void write_field_csv(std::ostream& out, const ScalarField& field);

// Opens for binary writing; throws IoError on failure.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace morse::io
