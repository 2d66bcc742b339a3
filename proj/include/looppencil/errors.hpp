#pragma once

#include <stdexcept>
#include <string>

namespace looppencil {

// Failure categories map onto CLI exit codes (see tools/).
enum class FailureKind { config = 2, assumption = 3, numerical = 4 };

class Error : public std::runtime_error {
public:
    Error(FailureKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    FailureKind kind() const noexcept { return kind_; }

private:
    FailureKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(FailureKind::config, what) {}
};

struct MissingArtifact : ConfigError {
    explicit MissingArtifact(const std::string& what) : ConfigError(what) {}
};

struct AssumptionError : Error {
    explicit AssumptionError(const std::string& what) : Error(FailureKind::assumption, what) {}
};

struct DegenerateAlphas : AssumptionError {
    explicit DegenerateAlphas(const std::string& what) : AssumptionError(what) {}
};

struct NotNormalized : AssumptionError {
    explicit NotNormalized(const std::string& what) : AssumptionError(what) {}
};

struct AssumptionBViolated : AssumptionError {
    explicit AssumptionBViolated(const std::string& what) : AssumptionError(what) {}
};

struct AssumptionDViolated : AssumptionError {
    explicit AssumptionDViolated(const std::string& what) : AssumptionError(what) {}
};

struct ConditionCViolated : AssumptionError {
    explicit ConditionCViolated(const std::string& what) : AssumptionError(what) {}
};

struct NumericalError : Error {
    explicit NumericalError(const std::string& what) : Error(FailureKind::numerical, what) {}
};

struct StepFailure : NumericalError {
    explicit StepFailure(const std::string& what) : NumericalError(what) {}
};

struct MultiplicityTooHigh : NumericalError {
    explicit MultiplicityTooHigh(const std::string& what) : NumericalError(what) {}
};

struct DivisionDegeneracy : NumericalError {
    explicit DivisionDegeneracy(const std::string& what) : NumericalError(what) {}
};

struct RankDeficient : NumericalError {
    explicit RankDeficient(const std::string& what) : NumericalError(what) {}
};

struct BranchSingular : NumericalError {
    explicit BranchSingular(const std::string& what) : NumericalError(what) {}
};

struct LemmaViolated : NumericalError {
    explicit LemmaViolated(const std::string& what) : NumericalError(what) {}
};

struct FitDiverged : NumericalError {
    explicit FitDiverged(const std::string& what) : NumericalError(what) {}
};

struct SingularGram : NumericalError {
    explicit SingularGram(const std::string& what) : NumericalError(what) {}
};

} // namespace looppencil
