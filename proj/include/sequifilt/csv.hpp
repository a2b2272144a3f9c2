#ifndef SEQUIFILT_CSV_HPP
#define SEQUIFILT_CSV_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sequifilt {

// Ordered observation data. Header: t,tau_seconds[,angle_radians][,batch].
// A missing angle column defaults every observation to angle 0 (zero-crossing
// time measurements). The optional batch column groups rows that are absorbed
// in a single filter step.
struct MeasurementSet {
    std::vector<double> times;
    std::vector<double> angles;
    std::vector<std::string> batch_labels;  // empty when no batch column
    bool has_batches = false;

    // Observation indices per filter step: grouped by batch label in order of
    // first appearance, or one observation per step without labels.
    std::vector<std::vector<std::size_t>> batches() const;
};

// Concatenates measurement sets from several files. With a single set the
// input is returned unchanged; otherwise batch labels get a per-file prefix
// so batches from different files never merge.
MeasurementSet merge_measurements(const std::vector<MeasurementSet>& sets);

MeasurementSet parse_measurements(std::istream& in, const std::string& source_name);
MeasurementSet parse_measurements(const std::filesystem::path& path);

}  // namespace sequifilt

#endif
