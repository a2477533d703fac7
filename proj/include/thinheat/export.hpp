#pragma once

// CSV export of solver slices.

#include <cstdio>
#include <string>

#include "thinheat/bulk_solver.hpp"
#include "thinheat/limit_solver.hpp"
#include "thinheat/report.hpp"

namespace thinheat {

// One block per time slice: rows (theta, value).
inline std::string limit_slices_csv(const LimitSolution& sol) {
  std::string out = "t,theta,value\n";
  char buf[96];
  int n = sol.n_theta();
  for (std::size_t k = 0; k < sol.times.size(); ++k)
    for (int j = 0; j < n; ++j) {
      double th = sol.node_theta.empty() ? two_pi * j / n
                                         : sol.node_theta[k][static_cast<std::size_t>(j)];
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.17g\n", sol.times[k], th,
                    sol.slices[k][static_cast<std::size_t>(j)]);
      out += buf;
    }
  return out;
}

// Rows (t, theta, s, x1, x2, value).
inline std::string bulk_slices_csv(const BulkSolution& sol, const ThinDomainSpec& spec) {
  std::string out = "t,theta,s,x1,x2,value\n";
  char buf[160];
  for (const BulkField& f : sol.fields)
    for (int j = 0; j < f.n_theta; ++j)
      for (int m = 0; m <= f.n_s; ++m) {
        double th = two_pi * j / f.n_theta, s = double(m) / f.n_s;
        Vec2 x = map_ref_to_phys(th, s, f.t, spec);
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.17g,%.17g,%.17g\n", f.t, th, s,
                      x.x(), x.y(), f.at(j, m));
        out += buf;
      }
  return out;
}

}  // namespace thinheat
