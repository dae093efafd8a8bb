#include <cmath>
#include <map>

#include "doctest.h"
#include "fvss/augment.hpp"
#include "fvss/rng.hpp"

using namespace fvss;
using namespace fvss::aug;

namespace {

ImageU8 random_image(int side, Rng& rng) {
  ImageU8 img(side, side);
  for (auto& b : img.data) b = static_cast<std::uint8_t>(rng.next_below(256));
  return img;
}

}  // namespace

TEST_SUITE("augment") {

TEST_CASE("temporal window converts seconds to frames with round-half-up") {
  CHECK(TemporalWindow{0.0, 5}.max_offset_frames() == 0);
  CHECK(TemporalWindow{3.0, 5}.max_offset_frames() == 15);
  CHECK(TemporalWindow{15.0, 5}.max_offset_frames() == 75);
  CHECK(TemporalWindow{2.5, 5}.max_offset_frames() == 13);  // 12.5 rounds up
  CHECK(TemporalWindow{0.1, 5}.max_offset_frames() == 1);   // 0.5 rounds up
}

TEST_CASE("zero window always returns the anchor") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i)
    CHECK(sample_neighbor_index(50, 0, 99, 0, rng) == 50);
}

TEST_CASE("sampled offsets stay within the window and inside video bounds") {
  Rng rng(2);
  for (const double dt : {1.0, 2.0, 3.0, 5.0, 15.0}) {
    const int k = TemporalWindow{dt, 5}.max_offset_frames();
    for (int i = 0; i < 20000; ++i) {
      const std::int64_t anchor = static_cast<std::int64_t>(rng.next_below(200));
      const std::int64_t n = sample_neighbor_index(anchor, 0, 199, k, rng);
      CHECK(std::llabs(n - anchor) <= k);
      CHECK(n >= 0);
      CHECK(n <= 199);
      CHECK(n != anchor);  // window is non-degenerate here
    }
  }
}

TEST_CASE("anchor at the video start draws only forward offsets, uniformly") {
  Rng rng(3);
  const int k = TemporalWindow{1.0, 5}.max_offset_frames();  // 5
  const int draws = 100000;
  std::map<std::int64_t, int> counts;
  for (int i = 0; i < draws; ++i) counts[sample_neighbor_index(0, 0, 1000, k, rng)]++;

  REQUIRE(counts.size() == 5);
  for (const auto& [offset, count] : counts) {
    CHECK(offset >= 1);
    CHECK(offset <= 5);
    // 4 sigma around the uniform expectation
    const double p = 1.0 / 5.0;
    const double sigma = std::sqrt(draws * p * (1.0 - p));
    CHECK(std::abs(count - draws * p) < 4.0 * sigma);
  }
}

TEST_CASE("degenerate window at a single-frame video falls back to the anchor") {
  Rng rng(4);
  CHECK(sample_neighbor_index(7, 7, 7, 10, rng) == 7);
}

TEST_CASE("identity policy reduces to a bilinear resize") {
  Rng rng(5);
  const ImageU8 img = random_image(48, rng);
  const AugmentPolicy policy = AugmentPolicy::identity(32);
  Rng draw(42);
  const ImageU8 out = augment(img, policy, draw);
  const ImageU8 expected = resize_bilinear(img, 32, 32);
  CHECK(out.data == expected.data);
}

TEST_CASE("augment is deterministic under a fixed seed") {
  Rng rng(6);
  const ImageU8 img = random_image(64, rng);
  AugmentPolicy policy;  // full MoCoV3-style pipeline
  policy.output_side = 32;
  Rng a(123), b(123);
  const ImageU8 out1 = augment(img, policy, a);
  const ImageU8 out2 = augment(img, policy, b);
  CHECK(out1.data == out2.data);

  Rng c(124);
  const ImageU8 out3 = augment(img, policy, c);
  CHECK(out1.data != out3.data);  // different seed, different draws
}

TEST_CASE("flip-only policy equals the horizontally mirrored resize") {
  Rng rng(7);
  const ImageU8 img = random_image(40, rng);
  AugmentPolicy policy = AugmentPolicy::identity(24);
  policy.flip_probability = 1.0;
  Rng draw(9);
  const ImageU8 out = augment(img, policy, draw);
  const ImageU8 expected = mirror_horizontal(resize_bilinear(img, 24, 24));
  REQUIRE(out.data.size() == expected.data.size());
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 24; ++x)
      for (int c = 0; c < 3; ++c) CHECK(out.at(x, y, c) == expected.at(x, y, c));
}

TEST_CASE("make_training_pair: self-pair with identity policy is byte-identical") {
  Rng rng(8);
  ingest::FrameRecord rec;
  rec.pixels = random_image(48, rng);
  PairAugmentPolicy policy;
  policy.query = AugmentPolicy::identity(32);
  policy.key = AugmentPolicy::identity(32);
  Rng draw(77);
  const TrainingViews views = make_training_pair(rec, rec, policy, draw);
  CHECK(views.view_q.data == views.view_k.data);
}

TEST_CASE("make_training_pair: different source frames give different views") {
  Rng rng(9);
  ingest::FrameRecord a, b;
  a.pixels = random_image(48, rng);
  b.pixels = random_image(48, rng);
  PairAugmentPolicy policy;
  policy.query = AugmentPolicy::identity(32);
  policy.key = AugmentPolicy::identity(32);
  Rng draw(78);
  const TrainingViews views = make_training_pair(a, b, policy, draw);
  CHECK(views.view_q.data != views.view_k.data);
}

TEST_CASE("make_training_pair replays byte-identically from a recorded seed") {
  Rng rng(10);
  ingest::FrameRecord a, b;
  a.pixels = random_image(64, rng);
  b.pixels = random_image(64, rng);
  const PairAugmentPolicy policy = PairAugmentPolicy::mocov3(32);

  const std::uint64_t seed = 31337;
  Rng first(seed);
  const TrainingViews v1 = make_training_pair(a, b, policy, first);
  Rng replay(seed);
  const TrainingViews v2 = make_training_pair(a, b, policy, replay);
  CHECK(v1.view_q.data == v2.view_q.data);
  CHECK(v1.view_k.data == v2.view_k.data);
}

TEST_CASE("offsets are uniform over the two-sided admissible set") {
  Rng rng(11);
  const int k = 10;
  const int draws = 200000;
  std::map<std::int64_t, int> counts;
  for (int i = 0; i < draws; ++i) counts[sample_neighbor_index(100, 0, 400, k, rng)]++;
  REQUIRE(counts.size() == 2 * k);

  // chi-square statistic against uniform; df = 19, 0.999 quantile ~ 43.8
  const double expect = draws / (2.0 * k);
  double chi2 = 0.0;
  for (const auto& [offset, count] : counts) {
    const double d = count - expect;
    chi2 += d * d / expect;
  }
  CHECK(chi2 < 43.8);
}

}  // TEST_SUITE
