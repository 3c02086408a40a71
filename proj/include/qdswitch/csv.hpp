#ifndef QDSWITCH_CSV_HPP
#define QDSWITCH_CSV_HPP

// Plot-ready CSV emission and spectrum/shift ingestion.
// Numbers are written as %.12e with '.' decimals, header row first, every
// row newline-terminated.

#include "qdswitch/cqed.hpp"
#include "qdswitch/errors.hpp"
#include "qdswitch/fitting.hpp"
#include "qdswitch/units.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

namespace qdswitch::csv {

inline std::string format_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12e", v);
    return buf;
}

using Cell = std::variant<double, std::string>;

class Table {
public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<Cell> row)
    {
        if (row.size() != header_.size())
            throw domain_error("csv row width does not match header");
        rows_.push_back(std::move(row));
    }

    std::size_t rows() const { return rows_.size(); }

    std::string str() const
    {
        std::string out = join(header_);
        for (const auto& row : rows_) {
            std::vector<std::string> cells;
            cells.reserve(row.size());
            for (const auto& c : row)
                cells.push_back(std::holds_alternative<double>(c) ? format_number(std::get<double>(c))
                                                                   : std::get<std::string>(c));
            out += join(cells);
        }
        return out;
    }

private:
    static std::string join(const std::vector<std::string>& cells)
    {
        std::string line;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
                line += ',';
            line += cells[i];
        }
        line += '\n';
        return line;
    }

    std::vector<std::string> header_;
    std::vector<std::vector<Cell>> rows_;
};

inline void write_file(const std::filesystem::path& path, std::string_view contents)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw io_error("cannot open " + path.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out)
        throw io_error("write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// Parsing

inline std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',')
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

// Strict full-token double parse.
inline bool parse_double(std::string_view s, double& out)
{
    s = trim(s);
    if (s.empty())
        return false;
    const std::string tmp(s);
    char* end = nullptr;
    errno = 0;
    out = std::strtod(tmp.c_str(), &end);
    return end == tmp.c_str() + tmp.size() && errno != ERANGE && std::isfinite(out);
}

struct NumericTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> line_numbers; // 1-based, header is line 1
};

inline NumericTable parse_numeric(std::string_view text, std::size_t expected_columns)
{
    NumericTable t;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty())
            continue;
        auto cells = split(line);
        if (!have_header) {
            if (cells.size() != expected_columns)
                throw ingest_error(line_no, "expected " + std::to_string(expected_columns) + " header columns");
            for (auto c : cells)
                t.header.emplace_back(c);
            have_header = true;
            continue;
        }
        if (cells.size() != expected_columns)
            throw ingest_error(line_no, "expected " + std::to_string(expected_columns) + " columns");
        std::vector<double> row(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i)
            if (!parse_double(cells[i], row[i]))
                throw ingest_error(line_no, "non-numeric value '" + std::string(cells[i]) + "'");
        t.rows.push_back(std::move(row));
        t.line_numbers.push_back(line_no);
    }
    if (!have_header)
        throw ingest_error(0, "empty file");
    if (t.rows.empty())
        throw ingest_error(0, "no data rows");
    return t;
}

// ---------------------------------------------------------------------------
// Spectra

// Header "detuning_GHz,<name>" (ordinary GHz offsets) or
// "wavelength_nm,<name>" (converted about lambda0 with dnu = -c dlambda/lambda0^2).
// Output is sorted; exact duplicate rows are merged, conflicting ones rejected.
inline Spectrum parse_spectrum(std::string_view text, double lambda0_nm)
{
    const NumericTable t = parse_numeric(text, 2);
    const std::string& mode = t.header[0];
    bool wavelength = false;
    if (mode == "wavelength_nm")
        wavelength = true;
    else if (mode != "detuning_GHz")
        throw ingest_error(1, "first column must be 'wavelength_nm' or 'detuning_GHz', got '" + mode + "'");
    if (wavelength && !(lambda0_nm > 0.0))
        throw ingest_error(0, "wavelength mode needs a positive reference wavelength");

    struct Sample {
        double w;
        double intensity;
        std::size_t line;
    };
    std::vector<Sample> samples;
    samples.reserve(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double x = t.rows[i][0];
        const double ghz = wavelength ? units::wavelength_offset_to_ghz(x - lambda0_nm, lambda0_nm) : x;
        if (!(t.rows[i][1] >= 0.0))
            throw ingest_error(t.line_numbers[i], "negative intensity");
        samples.push_back({units::ghz_to_angular(ghz), t.rows[i][1], t.line_numbers[i]});
    }
    std::stable_sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) { return a.w < b.w; });

    Spectrum s;
    for (const auto& smp : samples) {
        if (!s.detunings.empty() && smp.w == s.detunings.back()) {
            if (smp.intensity != s.intensities.back())
                throw ingest_error(smp.line, "duplicate frequency with conflicting intensity");
            continue;
        }
        s.detunings.push_back(smp.w);
        s.intensities.push_back(smp.intensity);
    }
    return s;
}

inline Spectrum ingest_spectrum_csv(const std::filesystem::path& path, double lambda0_nm)
{
    return parse_spectrum(read_file(path), lambda0_nm);
}

inline Table spectrum_table(const Spectrum& s, std::string intensity_name = "intensity")
{
    Table t({"detuning_GHz", std::move(intensity_name)});
    for (std::size_t i = 0; i < s.size(); ++i)
        t.add_row({units::angular_to_ghz(s.detunings[i]), s.intensities[i]});
    return t;
}

// "voltage_V,shift_meV"
inline ShiftDataset parse_shifts(std::string_view text)
{
    const NumericTable t = parse_numeric(text, 2);
    if (t.header[0] != "voltage_V" || t.header[1] != "shift_meV")
        throw ingest_error(1, "expected header 'voltage_V,shift_meV'");
    ShiftDataset d;
    for (const auto& row : t.rows)
        d.points.push_back({row[0], row[1]});
    return d;
}

inline ShiftDataset ingest_shift_csv(const std::filesystem::path& path) { return parse_shifts(read_file(path)); }

} // namespace qdswitch::csv

#endif
