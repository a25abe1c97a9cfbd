#pragma once

#include <vector>

#include "darn/model.hpp"
#include "darn/rng.hpp"

namespace testutil {

inline darn::Architecture make_arch(int n_x, std::vector<darn::StochasticLayerSpec> layers,
                                    bool visible_ar = false) {
  darn::Architecture a;
  a.n_x = n_x;
  a.layers = std::move(layers);
  a.visible_autoregressive = visible_ar;
  a.validate();
  return a;
}

inline darn::StochasticLayerSpec layer(int n_h, int det = 0, bool enc_ar = false,
                                       bool dec_ar = true) {
  return darn::StochasticLayerSpec{n_h, det, enc_ar, dec_ar};
}

inline Eigen::VectorXd random_bits(int n, darn::RandomStream& rs) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rs.bernoulli(0.5) ? 1.0 : 0.0;
  return v;
}

inline darn::Representation rep_of(std::vector<Eigen::VectorXd> bits) {
  darn::Representation rep;
  for (auto& b : bits) rep.layers.push_back({std::move(b), Eigen::VectorXd()});
  return rep;
}

inline Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

// A mixed bag of enumerable architectures exercising det layers, both
// autoregressive flags and multiple stacks.
inline std::vector<darn::Architecture> small_architectures() {
  return {
      make_arch(3, {layer(2)}),
      make_arch(2, {layer(3, 2)}, true),
      make_arch(3, {layer(2, 0, true)}, false),
      make_arch(2, {layer(2, 2), layer(2)}, true),
      make_arch(3, {layer(1), layer(2, 2, true)}, false),
      make_arch(2, {layer(2, 1), layer(1, 2), layer(2)}, true),
      make_arch(4, {layer(2, 3, false, false)}, false),
      make_arch(2, {layer(2, 0, true, false), layer(2, 2)}, true),
  };
}

}  // namespace testutil
