#include <doctest.h>

#include "gradcheck.hpp"

TEST_CASE("property: KAN gradients match finite differences on random nets") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto o = gradcheck::check_kan(seed);
    CHECK_MESSAGE(o.failed == 0, "seed ", seed, " shape ", o.shape, " worst rel ", o.worst_rel);
    CHECK(o.checked > 0);
  }
}

TEST_CASE("property: MLP gradients match finite differences on random nets") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto o = gradcheck::check_mlp(seed);
    CHECK_MESSAGE(o.failed == 0, "seed ", seed, " shape ", o.shape, " worst rel ", o.worst_rel);
  }
}
