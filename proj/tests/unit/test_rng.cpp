#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "cece/parallel.hpp"
#include "cece/rng.hpp"

using cece::Philox4x32;
using cece::RngDomain;
using cece::SubjectStream;

TEST_CASE("philox4x32-10 known-answer vectors") {
  CHECK(Philox4x32::block({0, 0, 0, 0}, {0, 0}) ==
        Philox4x32::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        Philox4x32::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        Philox4x32::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
  SubjectStream a(42, RngDomain::point_trial, 7);
  SubjectStream b(42, RngDomain::point_trial, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  std::set<std::uint64_t> firsts;
  for (std::uint64_t s = 0; s < 1000; ++s) firsts.insert(SubjectStream(42, RngDomain::point_trial, s).next_u64());
  CHECK(firsts.size() == 1000);

  CHECK(SubjectStream(42, RngDomain::point_trial, 0).next_u64() !=
        SubjectStream(42, RngDomain::misclassification, 0).next_u64());
  CHECK(SubjectStream(42, RngDomain::point_trial, 0).next_u64() !=
        SubjectStream(43, RngDomain::point_trial, 0).next_u64());
}

TEST_CASE("uniform draws lie in [0, 1) with the right first two moments") {
  SubjectStream rng(2021, RngDomain::coverage, 0);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(var - 1.0 / 12.0) < 0.002);
}

TEST_CASE("blocked reduction is identical under both policies") {
  const std::size_t n = 5 * cece::detail::kReduceBlock + 123;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = SubjectStream(9, RngDomain::coverage, i).uniform() * 1e-3 + 1.0 / (i + 1);
  auto run = [&](cece::Execution exec) {
    return cece::detail::blocked_reduce(
        n, 0.0,
        [&](std::size_t b, std::size_t e, double& acc) {
          for (std::size_t i = b; i < e; ++i) acc += x[i];
        },
        [](double& into, const double& p) { into += p; }, exec);
  };
  const double serial = run(cece::Execution::serial);
  const double parallel = run(cece::Execution::parallel);
  CHECK(serial == parallel);  // bitwise
}
