#include "pinchlab/thick_thin.hpp"

namespace pinchlab {

// The six topological types of nonempty collar systems on a genus-2 surface.
const std::vector<NamedDescriptor>& genus2_valid_catalog() {
  static const std::vector<NamedDescriptor> v = {
      {"one non-separating", R"({"genus":2,"collars":[{"ell":0.5}],"components":[{"genus":1,"ends":[0,1]}]})", 1},
      {"one separating", R"({"genus":2,"collars":[{"ell":0.5}],"components":[{"genus":1,"ends":[0]},{"genus":1,"ends":[1]}]})", 1},
      {"two non-separating",
       R"({"genus":2,"collars":[{"ell":0.5},{"ell":1.0}],"components":[{"genus":0,"ends":[0,1,2,3]}]})", 2},
      {"separating plus handle",
       R"({"genus":2,"collars":[{"ell":0.5},{"ell":1.0}],"components":[{"genus":1,"ends":[0]},{"genus":0,"ends":[1,2,3]}]})", 2},
      {"theta pants",
       R"({"genus":2,"collars":[{"ell":0.1},{"ell":0.2},{"ell":0.3}],"components":[{"genus":0,"ends":[0,2,4]},{"genus":0,"ends":[1,3,5]}]})", 3},
      {"dumbbell pants",
       R"({"genus":2,"collars":[{"ell":0.1},{"ell":0.2},{"ell":0.3}],"components":[{"genus":0,"ends":[0,1,2]},{"genus":0,"ends":[3,4,5]}]})", 3},
  };
  return v;
}

const std::vector<NamedDescriptor>& genus2_invalid_catalog() {
  static const std::vector<NamedDescriptor> v = {
      {"kappa above 3",
       R"({"genus":2,"collars":[{"ell":0.1},{"ell":0.1},{"ell":0.1},{"ell":0.1}],"components":[{"genus":0,"ends":[0,2,4,6]},{"genus":0,"ends":[1,3,5,7]}]})", 4},
      {"m above 2",
       R"({"genus":2,"collars":[{"ell":0.1},{"ell":0.1},{"ell":0.1}],"components":[{"genus":0,"ends":[0,2]},{"genus":0,"ends":[1,4]},{"genus":0,"ends":[3,5]}]})", 3},
      {"kappa below m-1", R"({"genus":2,"collars":[],"components":[{"genus":1,"ends":[]},{"genus":1,"ends":[]}]})", 0},
      {"Euler mismatch", R"({"genus":2,"collars":[{"ell":0.5}],"components":[{"genus":2,"ends":[0,1]}]})", 1},
  };
  return v;
}

}  // namespace pinchlab
