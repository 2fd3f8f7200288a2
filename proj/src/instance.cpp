#include "deanon/instance.hpp"

#include "deanon/error.hpp"

namespace deanon {

void DeanonInstance::validate() const {
  const std::size_t n = g1.size();
  require(g2.size() == n, "instance: g1 and g2 differ in node count");
  require(c1.size() == n, "instance: c1 does not cover g1");
  require(weights.size() == n, "instance: weights do not cover g1");
  if (truth) require(truth->size() == n, "instance: truth has the wrong size");
  if (c2) {
    require(c2->size() == n, "instance: c2 does not cover g2");
    if (truth) {
      require(observes_communities(*truth, c1, *c2),
              "instance: truth does not observe the community assignment");
    }
  }
}

double DeanonInstance::cost(Mode mode, const Mapping& m) const {
  return mode == Mode::bilateral ? bilateral_cost(g1, g2, weights, m)
                                 : unilateral_cost(g1, g2, weights, m);
}

const CommunityAssignment& DeanonInstance::require_c2() const {
  require(c2.has_value(), "bilateral mode needs the community assignment of g2");
  return *c2;
}

}  // namespace deanon
