#pragma once

#include <stdexcept>
#include <string>

namespace stcutfem {

/// Base class for all failures this library raises on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// All three vertex values of a cut rule are within the degeneracy band.
struct DegenerateCut : Error {
  using Error::Error;
};

/// A slab classification produced an empty bulk active set.
struct EmptyActiveSet : Error {
  using Error::Error;
};

/// The mesh deformation produced a non-positive Jacobian determinant.
struct MappingDegenerate : Error {
  using Error::Error;
};

/// Trace transfer needed a value on an element the previous slab never carried.
struct TransferOutOfDomain : Error {
  using Error::Error;
};

/// Sparse factorization broke down or the solve left a large residual.
struct SingularSystem : Error {
  using Error::Error;
};

/// Newton iteration exceeded its budget or blew up.
struct NewtonDiverged : Error {
  int slab = -1;
  NewtonDiverged(const std::string& what, int slab_index)
      : Error(what), slab(slab_index) {}
};

}  // namespace stcutfem
