#pragma once

#include <string>

#include "disperse/dynamics.hpp"
#include "disperse/profile.hpp"

namespace fixture {

struct Spec {
  std::size_t n = 256;
  std::string K = "1";
  std::string P = "1";
  std::string Q = "1";
  std::string r = "1";
  std::string a = "1";
  double d1 = 1.0, d2 = 1.0, r1 = 1.0, r2 = 1.0;
  double dt = 1e-3;
  double t_end = 5000.0;
  double tol_steady = 1e-9;
};

inline disperse::SpatialField field(const std::string& text, const disperse::Grid1D& g) {
  return disperse::sample(disperse::parse_profile(text), g);
}

inline disperse::Scenario make(const Spec& s) {
  using namespace disperse;
  const Grid1D g(s.n, 0.0, 1.0);
  const SpatialField K = field(s.K, g);
  StepperConfig stepper;
  stepper.dt = s.dt;
  stepper.t_end = s.t_end;
  stepper.tol_steady = s.tol_steady;
  return Scenario{K,
                  field(s.r, g),
                  field(s.a, g),
                  SpeciesParams{field(s.P, g), s.d1, s.r1},
                  SpeciesParams{field(s.Q, g), s.d2, s.r2},
                  default_initial_u(K),
                  default_initial_v(K),
                  stepper};
}

}  // namespace fixture
