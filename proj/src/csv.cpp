#include "sequifilt/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "sequifilt/errors.hpp"

namespace sequifilt {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

std::string strip(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& cell, const std::string& source,
                    std::size_t line_no) {
    try {
        std::size_t used = 0;
        double v = std::stod(cell, &used);
        if (used != strip(cell).size() && used != cell.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(
            fmt::format("{}: malformed number '{}' at line {}", source, cell, line_no));
    }
}

}  // namespace

std::vector<std::vector<std::size_t>> MeasurementSet::batches() const {
    std::vector<std::vector<std::size_t>> out;
    if (!has_batches) {
        for (std::size_t i = 0; i < times.size(); ++i) out.push_back({i});
        return out;
    }
    std::vector<std::string> seen;
    for (std::size_t i = 0; i < times.size(); ++i) {
        auto it = std::find(seen.begin(), seen.end(), batch_labels[i]);
        if (it == seen.end()) {
            seen.push_back(batch_labels[i]);
            out.push_back({i});
        } else {
            out[static_cast<std::size_t>(it - seen.begin())].push_back(i);
        }
    }
    return out;
}

MeasurementSet merge_measurements(const std::vector<MeasurementSet>& sets) {
    if (sets.empty()) throw ConfigError("no measurement sets to merge");
    if (sets.size() == 1) return sets.front();
    MeasurementSet merged;
    merged.has_batches = true;
    for (std::size_t k = 0; k < sets.size(); ++k) {
        const MeasurementSet& s = sets[k];
        for (std::size_t i = 0; i < s.times.size(); ++i) {
            merged.times.push_back(s.times[i]);
            merged.angles.push_back(s.angles[i]);
            std::string label =
                s.has_batches ? s.batch_labels[i] : fmt::format("row{}", i);
            merged.batch_labels.push_back(fmt::format("f{}:{}", k, label));
        }
    }
    return merged;
}

MeasurementSet parse_measurements(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError(fmt::format("{}: empty measurement file", source));
    std::vector<std::string> header = split(line);
    for (auto& h : header) h = strip(h);

    if (header.size() < 2 || header[0] != "t" || header[1] != "tau_seconds")
        throw ConfigError(fmt::format(
            "{}: header must start with 't,tau_seconds', got '{}'", source, line));
    int angle_col = -1, batch_col = -1;
    for (std::size_t c = 2; c < header.size(); ++c) {
        if (header[c] == "angle_radians" && angle_col < 0)
            angle_col = static_cast<int>(c);
        else if (header[c] == "batch" && batch_col < 0)
            batch_col = static_cast<int>(c);
        else
            throw ConfigError(
                fmt::format("{}: unknown column '{}'", source, header[c]));
    }

    MeasurementSet set;
    set.has_batches = batch_col >= 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) continue;
        std::vector<std::string> cells = split(line);
        if (cells.size() != header.size())
            throw ConfigError(fmt::format(
                "{}: expected {} columns at line {}, got {}", source,
                header.size(), line_no, cells.size()));
        parse_double(cells[0], source, line_no);  // index column, value unused
        double tau = parse_double(cells[1], source, line_no);
        if (!(tau > 0.0) || !std::isfinite(tau))
            throw ConfigError(fmt::format(
                "{}: observation time must be positive at line {}", source, line_no));
        double angle = 0.0;
        if (angle_col >= 0)
            angle = parse_double(cells[static_cast<std::size_t>(angle_col)], source,
                                 line_no);
        if (!std::isfinite(angle))
            throw ConfigError(
                fmt::format("{}: non-finite angle at line {}", source, line_no));
        set.times.push_back(tau);
        set.angles.push_back(angle);
        if (batch_col >= 0)
            set.batch_labels.push_back(
                strip(cells[static_cast<std::size_t>(batch_col)]));
    }
    if (set.times.empty())
        throw ConfigError(fmt::format("{}: no measurements", source));
    return set;
}

MeasurementSet parse_measurements(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError(fmt::format("cannot open measurement file '{}'",
                                      path.string()));
    return parse_measurements(in, path.filename().string());
}

}  // namespace sequifilt
