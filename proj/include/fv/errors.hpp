#pragma once

#include <stdexcept>
#include <string>

namespace fv {

struct SlotCollision : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownSlot : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BadWindow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LayoutCollision : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoSliceFound : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroProbability : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotAnEffect : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotOrderable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GeometryViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LocalizationViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoWitnessFound : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SchemaError : ConfigError {
    using ConfigError::ConfigError;
};

struct PhysicsValidationError : ConfigError {
    using ConfigError::ConfigError;
};

} // namespace fv
