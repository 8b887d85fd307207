#pragma once

// Shared test oracles. These stay independent of the implementation paths
// they check: the word-closure span is built by brute-force multiplication,
// never through the double commutant.

#include "takdual/num.hpp"
#include "takdual/vna.hpp"

#include <vector>

namespace takdual::testing {

using num::Index;
using num::Mat;

// Span of all words of length <= max_len in the generators, their adjoints
// and the identity, as an orthonormal matrix subspace.
inline num::MatSubspace word_closure_span(const std::vector<Mat>& generators,
                                          Index dim, int max_len) {
  std::vector<Mat> letters{Mat::Identity(dim, dim)};
  for (const Mat& g : generators) {
    letters.push_back(g);
    letters.push_back(g.adjoint());
  }
  std::vector<Mat> words = letters;
  num::MatSubspace span = num::MatSubspace::from_span(words, 1e-10);
  std::vector<Mat> frontier = letters;
  for (int len = 2; len <= max_len; ++len) {
    std::vector<Mat> next;
    bool grew = false;
    for (const Mat& w : frontier)
      for (const Mat& l : letters) {
        Mat prod = w * l;
        double nrm = prod.norm();
        if (nrm < 1e-14) continue;
        prod /= nrm;
        if (!span.contains(prod, 1e-10)) {
          next.push_back(prod);
          words.push_back(prod);
          span = num::MatSubspace::from_span(words, 1e-10);
          grew = true;
        }
      }
    if (!grew) break;
    frontier = std::move(next);
  }
  return span;
}

inline Mat random_generator(num::Rng& rng, Index dim) {
  return rng.gaussian_matrix(dim, dim) / std::sqrt(static_cast<double>(dim));
}

}  // namespace takdual::testing
