#pragma once

#include <stdexcept>
#include <string>

namespace horoflow {

// Every failure the library can signal. CLI maps these to exit codes:
// parse/validation -> 2, inconclusive verdicts -> 3, everything else -> 1.
enum class Err {
    InvalidPoint,     // point with im <= 0
    BadDeterminant,   // matrix with det <= 0, or spec file with det != 1
    NotHyperbolic,    // axis requested for elliptic/parabolic/identity
    NonpositiveScale, // affine parameter alpha <= 0
    Degenerate,       // angle vertex coincides with an endpoint
    DegenerateXi,     // Busemann base point landed at infinity
    BudgetExceeded,   // enumeration grew past its element cap
    NoConvergence,    // Dirichlet descent exceeded its step cap
    NoCluster,        // Busemann values have no cluster of size >= 3
    EscapeFail,       // no crossing escapes past the boundary threshold
    BaseOffCircle,    // gluing-map base coordinate not on the unit circle
    NotAPath,         // node ids do not form a simple root path
    Parse,            // malformed input document
    Validation,       // bad CLI arguments or config values
};

const char* err_name(Err e);

class Error : public std::runtime_error {
  public:
    Error(Err code, const std::string& what)
        : std::runtime_error(std::string(err_name(code)) + ": " + what), code_(code) {}

    Err code() const { return code_; }

  private:
    Err code_;
};

} // namespace horoflow
