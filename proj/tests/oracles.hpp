#pragma once

#include <complex>
#include <vector>

#include "entsim/model.hpp"

namespace entsim::test {

// drho/dt written out entry by entry from the master equation, independent of
// the library's matrix forms: -i(H rho - rho H) + sum r (2 L rho L^+ - L^+L rho - rho L^+L).
inline Operator oracle_rhs(const Operator& h, const std::vector<Dissipator>& ds, const Operator& rho) {
  const int d = static_cast<int>(rho.rows());
  Operator out = Operator::Zero(d, d);
  const cplx i(0, 1);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      cplx acc = 0;
      for (int k = 0; k < d; ++k) acc += -i * (h(a, k) * rho(k, b) - rho(a, k) * h(k, b));
      for (const auto& diss : ds) {
        const Operator& l = diss.jump;
        cplx sandwich = 0, left = 0, right = 0;
        for (int k = 0; k < d; ++k) {
          for (int m = 0; m < d; ++m) {
            sandwich += l(a, k) * rho(k, m) * std::conj(l(b, m));
            left += std::conj(l(k, a)) * l(k, m) * rho(m, b);
            right += rho(a, k) * std::conj(l(m, k)) * l(m, b);
          }
        }
        acc += diss.rate * (2.0 * sandwich - left - right);
      }
      out(a, b) = acc;
    }
  }
  return out;
}

}  // namespace entsim::test
