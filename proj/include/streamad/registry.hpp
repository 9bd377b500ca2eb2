#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "streamad/core.hpp"

namespace streamad {

struct DetectorInfo {
    std::string name;
    /// "point" or "pattern" -- pattern detectors emit spans and their
    /// accuracies are only comparable within the pattern family.
    std::string family;
    std::string summary;
    std::map<std::string, double> defaults;
};

/// All registered techniques, in listing order.
const std::vector<DetectorInfo>& detector_catalog();

bool is_pattern_family(const std::string& technique);

/// Builds a detector for the given series (window cap, seasonal period hint
/// and pattern length are taken from the series unless overridden by
/// parameters). Throws config_error for unknown techniques or bad parameters.
std::unique_ptr<Detector> make_detector(const DetectorSpec& spec, const LabeledSeries& series);

}  // namespace streamad
