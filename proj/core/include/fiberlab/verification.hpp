#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fiberlab/numerics.hpp"

namespace fiberlab {

/// Knobs for the acceptance checks.  Loaded from a flat, typed JSON document
/// with an explicit schema version; unknown keys are rejected so configs stay
/// reproducible.
struct VerifyConfig {
  int schema_version = 1;
  double p = 4.0;
  double alpha = 0.25;
  double delta = 0.4;
  std::uint64_t seed = 7;
  int rigid_samples = 10000;    // criterion 1: random stiff-set probes
  int lift_samples = 10000;     // criterion 4: random directors
  int slab_configs = 100;       // criterion 6: random slab geometries
  int slab_fields = 20;         // criterion 6: trace-respecting fields each
  int rotation_samples = 100;   // criterion 11: random matrices
  int rotation_grid = 100000;   // criterion 11: oracle grid size

  static VerifyConfig from_json(const std::string& text);
  std::string to_json() const;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerificationReport {
  VerifyConfig config;
  std::vector<CriterionResult> results;
  /// Deterministic text rendering (no timings), compared byte-for-byte by the
  /// repeat-run criterion and emitted as the `verify` report body.
  std::string canonical;

  bool all_pass() const;
};

/// Brute-force distance to SO(3): minimum of ||F - R||_F over a seeded
/// quaternion grid (`samples` points) followed by axis-angle coordinate
/// descent with step halving.  Evaluates the norm directly — no SVD — so it
/// is an independent oracle for dist_SO3.
double dist_SO3_grid(const Matrix3d& F, int samples = 100000, std::uint64_t seed = 1);

/// Runs checks 1-11 once.
VerificationReport run_once(const VerifyConfig& config);

/// Runs the full battery twice and appends the byte-identity comparison of
/// the two renderings as criterion 12.
VerificationReport run_verification(const VerifyConfig& config);

}  // namespace fiberlab
