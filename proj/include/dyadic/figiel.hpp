#pragma once

// Figiel-type splitting of <<g, T f>> for an operator given by its Haar
// tensor. With f_{I,0} = <h^0_I, f> the averaging coefficient,
//
//   A  = sum over same-level (J, eta), (I, theta) of tr(g_{J,eta}^* <h^eta_J, T h^theta_I> f_{I,theta})
//   B0 = sum tr((g_{J,0} - g_{I,0})^* <h^0_J, T h^theta_I> f_{I,theta})
//   P  = <<g, paraproduct_adjoint((T^*1)^*, f)>>
//   C0 = sum tr(g_{J,eta}^* <h^eta_J, T h^0_I> (f_{I,0} - f_{J,0}))
//   Q  = <<g, paraproduct(T1, f)>>
//   coarse = <<E_0 g, T E_0 f>>
//
// and A + B0 + P + C0 + Q + coarse = <<g, T f>>.

#include <map>

#include "dyadic/tensor.hpp"

namespace dyadic {

struct FigielTerms {
    Complex a{}, b0{}, p{}, c0{}, q{};
    Complex coarse{};
    /// Contributions to A, B0 and C0 grouped by the centered translation
    /// m with J = I + m.
    std::map<Index, Complex> a_by_m, b0_by_m, c0_by_m;

    Complex total() const { return a + b0 + p + c0 + q + coarse; }
};

FigielTerms figiel_terms(const HaarTensorOperator& t, const MatrixField& f, const MatrixField& g);

} // namespace dyadic
