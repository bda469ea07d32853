#pragma once

#include <stdexcept>
#include <string>

namespace pinchflow {

// Base class for all domain errors thrown by the library.
struct flow_error : std::runtime_error {
  explicit flow_error(const std::string& what) : std::runtime_error(what) {}
};

struct zero_mean_curvature : flow_error {
  explicit zero_mean_curvature(const std::string& what = "mean curvature vector vanishes")
      : flow_error(what) {}
};

struct not_pinched : flow_error {
  explicit not_pinched(const std::string& what = "frame violates the pinching condition")
      : flow_error(what) {}
};

struct invalid_slope : flow_error {
  explicit invalid_slope(const std::string& what = "pinching slope c must exceed 1/n")
      : flow_error(what) {}
};

struct missing_gradient : flow_error {
  explicit missing_gradient(const std::string& what = "frame carries no gradient data")
      : flow_error(what) {}
};

struct extinct : flow_error {
  explicit extinct(const std::string& what = "model has shrunk to a point") : flow_error(what) {}
};

struct degenerate_immersion : flow_error {
  explicit degenerate_immersion(const std::string& what = "profile curve fails to immerse")
      : flow_error(what) {}
};

struct rank_deficient : flow_error {
  explicit rank_deficient(const std::string& what = "chart Jacobian is numerically singular")
      : flow_error(what) {}
};

struct indeterminate_order : flow_error {
  explicit indeterminate_order(const std::string& what = "refinement differences underflow")
      : flow_error(what) {}
};

struct no_qualifying_points : flow_error {
  explicit no_qualifying_points(const std::string& what = "no samples above curvature threshold")
      : flow_error(what) {}
};

struct below_threshold : flow_error {
  explicit below_threshold(const std::string& what = "curvature below required threshold")
      : flow_error(what) {}
};

struct insufficient_history : flow_error {
  explicit insufficient_history(const std::string& what = "trajectory too short for lookback")
      : flow_error(what) {}
};

struct window_exceeds_domain : flow_error {
  explicit window_exceeds_domain(const std::string& what = "neck window wraps the whole profile")
      : flow_error(what) {}
};

struct precondition_failed : flow_error {
  explicit precondition_failed(const std::string& what = "operation precondition unmet")
      : flow_error(what) {}
};

struct config_error : flow_error {
  explicit config_error(const std::string& what) : flow_error(what) {}
};

}  // namespace pinchflow
