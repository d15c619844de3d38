#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nomina {

/// Base of every error thrown by this library. `kind()` is a stable
/// machine-readable tag; `what()` carries the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(std::string_view kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    std::string_view kind() const noexcept { return kind_; }

private:
    std::string_view kind_;  // static storage, set by the concrete type
};

#define NOMINA_DEFINE_ERROR(Name)                                  \
    struct Name : Error {                                          \
        explicit Name(const std::string& message)                  \
            : Error(#Name, message) {}                             \
    }

// corpus / encoder
NOMINA_DEFINE_ERROR(EmptyName);
NOMINA_DEFINE_ERROR(UnmappableCharacter);
NOMINA_DEFINE_ERROR(SchemaError);
NOMINA_DEFINE_ERROR(ParseError);
NOMINA_DEFINE_ERROR(CorpusTooSmall);
NOMINA_DEFINE_ERROR(MalformedMatrix);

// numerics / neural
NOMINA_DEFINE_ERROR(ShapeMismatch);
NOMINA_DEFINE_ERROR(LengthMismatch);
NOMINA_DEFINE_ERROR(EmptyBatch);
NOMINA_DEFINE_ERROR(NonFiniteGradient);
NOMINA_DEFINE_ERROR(NonFiniteValue);
NOMINA_DEFINE_ERROR(KernelTooWide);
NOMINA_DEFINE_ERROR(UnknownKind);
NOMINA_DEFINE_ERROR(EmptyPartition);
NOMINA_DEFINE_ERROR(DivergedLoss);

// classical
NOMINA_DEFINE_ERROR(EmptySet);
NOMINA_DEFINE_ERROR(Diverged);
NOMINA_DEFINE_ERROR(NoConvergence);
NOMINA_DEFINE_ERROR(TooFewNeighbors);

// metrics
NOMINA_DEFINE_ERROR(EmptyMatrix);

// model files
NOMINA_DEFINE_ERROR(ModelFormatError);
NOMINA_DEFINE_ERROR(VersionMismatch);
NOMINA_DEFINE_ERROR(CorruptFile);
NOMINA_DEFINE_ERROR(SeedMismatch);

// generic precondition violations
NOMINA_DEFINE_ERROR(InvalidArgument);
NOMINA_DEFINE_ERROR(IoError);

#undef NOMINA_DEFINE_ERROR

}  // namespace nomina
