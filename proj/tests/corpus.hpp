#pragma once

// Small graphs shared by the exact-identity and monotonicity tests. All fit
// the enumeration limits (<= 20 sites, <= 24 bond variables).

#include <vector>

#include "fkghost/lattice.hpp"

namespace fkghost::testing {

struct CorpusEntry {
  int width;
  int height;
};

inline const std::vector<CorpusEntry>& corpus_shapes() {
  static const std::vector<CorpusEntry> shapes = {
      {1, 1}, {1, 2}, {2, 2}, {1, 3}, {3, 1}, {2, 3}, {1, 4}, {2, 4}, {3, 3},
  };
  return shapes;
}

inline LatticeSpec corpus_spec(const CorpusEntry& e, Boundary b = Boundary::Free) {
  return LatticeSpec{e.width, e.height, 1.0, b};
}

}  // namespace fkghost::testing
