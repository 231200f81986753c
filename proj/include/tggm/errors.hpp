#pragma once

#include <stdexcept>
#include <string>

namespace tggm {

// Malformed input files, bad JSON, schema violations. CLI maps this to exit code 2.
struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

// Domain errors such as an ROI that admits no windows. CLI maps this to exit code 3.
struct EmptyRoiError : std::runtime_error {
    explicit EmptyRoiError(const std::string& what) : std::runtime_error(what) {}
};

// Scene generation could not place the requested objects.
struct CapacityError : std::runtime_error {
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tggm
