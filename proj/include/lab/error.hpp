#pragma once

#include <stdexcept>
#include <string>

namespace lab {

enum class ErrorCode {
    invalid_argument,
    unrepresentable_spec,
    oracle_unavailable,
    inapplicable,
    contraction_failure,
    step_singularity,
    blowup_detected,
    undefined_ratio,
    invalid_params,
    singular_kernel,
    near_singular_time,
    no_unique_path,
    inconclusive,
    config_error,
};

const char* to_string(ErrorCode c);

class LabError : public std::runtime_error {
public:
    LabError(ErrorCode code, const std::string& msg)
        : std::runtime_error(std::string(to_string(code)) + ": " + msg), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Contraction failure carries the last successive-iterate ratio.
class ContractionFailure : public LabError {
public:
    ContractionFailure(const std::string& msg, double last_ratio)
        : LabError(ErrorCode::contraction_failure, msg), last_ratio(last_ratio) {}
    double last_ratio;
};

class BlowupDetected : public LabError {
public:
    BlowupDetected(const std::string& msg, double time)
        : LabError(ErrorCode::blowup_detected, msg), time(time) {}
    double time;
};

} // namespace lab
