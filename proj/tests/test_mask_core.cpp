#include <filesystem>
#include <random>
#include <set>

#include "doctest.h"
#include "ivos/image_io.hpp"
#include "ivos/mask_ops.hpp"
#include "test_support.hpp"

using namespace ivos;
namespace fs = std::filesystem;

namespace {

const fs::path kData = fs::path(IVOS_TEST_DATA_DIR);

BinaryMask mask_from(RasterSize size, std::vector<std::uint8_t> bits) { return BinaryMask(size, std::move(bits)); }

}  // namespace

TEST_CASE("raster size rejects non-positive dimensions") {
  CHECK_THROWS_AS(RasterSize(0, 4), Error);
  CHECK_THROWS_AS(RasterSize(4, -1), Error);
  CHECK_THROWS_AS(RasterSize(65536, 65537), Error);
  CHECK(RasterSize(3, 2).area() == 6);
}

TEST_CASE("load_label_mask") {
  SUBCASE("2x2 checker copies palette indices") {
    const LabelMask m = load_label_mask(kData / "checker_2x2.png");
    CHECK(m.size == RasterSize(2, 2));
    CHECK(m.labels == std::vector<std::uint8_t>{0, 1, 1, 0});
  }
  SUBCASE("blank frame has no objects") {
    const LabelMask m = load_label_mask(kData / "blank_3x3.png");
    CHECK(m.labels == std::vector<std::uint8_t>(9, 0));
  }
  SUBCASE("two-object annotation fixture") {
    // Pixel dump of the fixture: object 1 at rows 1-2, cols 1-3; object 2 at rows 3-5, cols 5-7.
    const LabelMask m = load_label_mask(kData / "two_objects.png");
    CHECK(m.size == RasterSize(8, 6));
    std::set<int> ids(m.labels.begin(), m.labels.end());
    CHECK(ids == std::set<int>{0, 1, 2});
    CHECK(m.at(1, 1) == 1);
    CHECK(m.at(3, 2) == 1);
    CHECK(m.at(5, 3) == 2);
    CHECK(m.at(7, 5) == 2);
    CHECK(m.at(4, 3) == 0);
    CHECK(testing::oracle_count(extract_object(m, 1)) == 6);
    CHECK(testing::oracle_count(extract_object(m, 2)) == 9);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(load_label_mask(kData / "missing.png"), Error);
    CHECK_THROWS_AS(load_label_mask(kData / "rgb.png"), Error);
    CHECK_THROWS_AS(load_label_mask(kData / "label_255.png"), Error);
  }
  SUBCASE("save then load round-trips") {
    std::mt19937_64 rng(3);
    const LabelMask m = testing::random_labels(rng, RasterSize(13, 7), 3);
    const fs::path tmp = fs::temp_directory_path() / "ivos_roundtrip.png";
    save_label_mask(tmp, m);
    CHECK(load_label_mask(tmp) == m);
    fs::remove(tmp);
  }
}

TEST_CASE("extract_object") {
  const LabelMask m(RasterSize(2, 2), {0, 1, 2, 1});
  CHECK(extract_object(m, 1).bits == std::vector<std::uint8_t>{0, 1, 0, 1});
  CHECK(extract_object(m, 9).count() == 0);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const LabelMask r = testing::random_labels(rng, RasterSize(8, 8), 4);
    for (int id = 1; id <= 4; ++id) {
      const BinaryMask b = extract_object(r, static_cast<ObjectId>(id));
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) CHECK(b.at(x, y) == (r.at(x, y) == id));
    }
  }
}

TEST_CASE("connected_components") {
  SUBCASE("two separated 2x2 blocks") {
    BinaryMask m(RasterSize(6, 3));
    for (int y = 0; y < 2; ++y)
      for (int x : {0, 1, 4, 5}) m.set(x, y);
    const auto cc = connected_components(m, Connectivity::eight);
    REQUIRE(cc.size() == 2);
    CHECK(cc[0].area == 4);
    CHECK(cc[1].area == 4);
    CHECK(cc[0].first_index < cc[1].first_index);
  }
  SUBCASE("empty mask") { CHECK(connected_components(BinaryMask(RasterSize(4, 4)), Connectivity::four).empty()); }
  SUBCASE("diagonal pair depends on connectivity") {
    const BinaryMask m = mask_from(RasterSize(2, 2), {1, 0, 0, 1});
    CHECK(connected_components(m, Connectivity::eight).size() ==
          static_cast<std::size_t>(testing::oracle_component_count(m, true)));
    CHECK(connected_components(m, Connectivity::eight).size() == 1);
    CHECK(connected_components(m, Connectivity::four).size() == 2);
  }
  SUBCASE("ordering by area then first pixel") {
    BinaryMask m(RasterSize(8, 1));
    m.set(0, 0);
    m.set(2, 0);
    m.set(3, 0);
    m.set(5, 0);
    const auto cc = connected_components(m, Connectivity::eight);
    REQUIRE(cc.size() == 3);
    CHECK(cc[0].area == 2);
    CHECK(cc[1].first_index == 0);
    CHECK(cc[2].first_index == 5);
  }
  SUBCASE("partition property on random masks") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      const BinaryMask m = testing::random_mask(rng, RasterSize(12, 9), 0.4);
      for (const auto conn : {Connectivity::four, Connectivity::eight}) {
        const auto cc = connected_components(m, conn);
        CHECK(cc.size() == static_cast<std::size_t>(testing::oracle_component_count(m, conn == Connectivity::eight)));
        BinaryMask uni(m.size);
        std::size_t area_sum = 0;
        for (const auto& c : cc) {
          for (std::size_t i = 0; i < uni.bits.size(); ++i) {
            CHECK_FALSE((uni.bits[i] && c.mask.bits[i]));
            uni.bits[i] |= c.mask.bits[i];
          }
          CHECK(testing::oracle_count(c.mask) == c.area);
          area_sum += c.area;
        }
        CHECK(uni == m);
        CHECK(area_sum == testing::oracle_count(m));
        for (std::size_t i = 1; i < cc.size(); ++i) {
          const bool ordered = cc[i - 1].area > cc[i].area ||
                               (cc[i - 1].area == cc[i].area && cc[i - 1].first_index < cc[i].first_index);
          CHECK(ordered);
        }
      }
    }
  }
}

TEST_CASE("dilate") {
  std::mt19937_64 rng(17);
  SUBCASE("radius 0 is the identity") {
    const BinaryMask m = testing::random_mask(rng, RasterSize(9, 9), 0.3);
    CHECK(dilate(m, StructuringElement::disk(0)) == m);
    CHECK(dilate(m, StructuringElement::square(0)) == m);
  }
  SUBCASE("disk radius 1 on a single pixel is a plus") {
    BinaryMask m(RasterSize(5, 5));
    m.set(2, 2);
    const BinaryMask d = dilate(m, StructuringElement::disk(1));
    CHECK(d.count() == 5);
    CHECK((d.at(2, 1) && d.at(1, 2) && d.at(2, 2) && d.at(3, 2) && d.at(2, 3)));
  }
  SUBCASE("square element covers the full box") {
    BinaryMask m(RasterSize(7, 7));
    m.set(3, 3);
    CHECK(dilate(m, StructuringElement::square(2)).count() == 25);
  }
  SUBCASE("matches the Minkowski-sum oracle") {
    for (int trial = 0; trial < 30; ++trial) {
      const BinaryMask m = testing::random_mask(rng, RasterSize(16, 16), 0.1);
      for (int r : {1, 2, 3, 5}) CHECK(dilate(m, StructuringElement::disk(r)) == testing::oracle_dilate_disk(m, r));
    }
  }
  SUBCASE("monotone in the mask and the element") {
    for (int trial = 0; trial < 50; ++trial) {
      const BinaryMask m = testing::random_mask(rng, RasterSize(20, 11), 0.05);
      BinaryMask prev = m;
      for (int r = 1; r <= 4; ++r) {
        const BinaryMask d = dilate(m, StructuringElement::disk(r));
        CHECK(is_subset(m, d));
        CHECK(is_subset(prev, d));
        prev = d;
      }
    }
  }
  SUBCASE("element larger than the raster") {
    BinaryMask m(RasterSize(3, 2));
    m.set(0, 0);
    CHECK(dilate(m, StructuringElement::square(10)).count() == 6);
  }
}

TEST_CASE("skeletonize") {
  SUBCASE("unit-width line is unchanged") {
    BinaryMask m(RasterSize(10, 1));
    for (int x = 0; x < 10; ++x) m.set(x, 0);
    CHECK(skeletonize(m) == m);
  }
  SUBCASE("empty mask") { CHECK(skeletonize(BinaryMask(RasterSize(4, 4))).count() == 0); }
  SUBCASE("5x5 filled square") {
    // Hand run: the N/S/E/W passes peel one ring per iteration; the last
    // ring leaves the middle row whose end pixels are protected endpoints.
    for (const int pad : {0, 1}) {
      BinaryMask m(RasterSize(5 + 2 * pad, 5 + 2 * pad));
      for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x) m.set(x + pad, y + pad);
      const BinaryMask s = skeletonize(m);
      CHECK(s.count() <= 5);
      CHECK(s.at(2 + pad, 2 + pad));
      CHECK_FALSE(testing::has_full_2x2(s));
      CHECK(testing::oracle_component_count(s, true) == 1);
      BinaryMask expected(m.size);
      for (int x = 1; x <= 3; ++x) expected.set(x + pad, 2 + pad);
      CHECK(s == expected);
    }
  }
  SUBCASE("invariants on random masks") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 300; ++trial) {
      const BinaryMask m = trial % 2 ? testing::random_mask(rng, RasterSize(16, 16), 0.55)
                                     : testing::random_blobs(rng, RasterSize(24, 20), 3);
      const BinaryMask s = skeletonize(m);
      CHECK(is_subset(s, m));
      CHECK_FALSE(testing::has_full_2x2(s));
      CHECK(testing::oracle_component_count(s, true) == testing::oracle_component_count(m, true));
      CHECK(skeletonize(m) == s);
    }
  }
}

TEST_CASE("boundary") {
  SUBCASE("3x3 square in a 5x5 frame") {
    BinaryMask m(RasterSize(5, 5));
    for (int y = 1; y <= 3; ++y)
      for (int x = 1; x <= 3; ++x) m.set(x, y);
    const BinaryMask b = boundary(m);
    CHECK(b.count() == 8);
    CHECK_FALSE(b.at(2, 2));
  }
  SUBCASE("single pixel") {
    BinaryMask m(RasterSize(3, 3));
    m.set(1, 1);
    CHECK(boundary(m) == m);
  }
  SUBCASE("image border counts as background") {
    BinaryMask m(RasterSize(3, 3));
    std::fill(m.bits.begin(), m.bits.end(), 1);
    CHECK(boundary(m).count() == 8);
  }
  SUBCASE("matches the neighbourhood oracle") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 100; ++trial) {
      const BinaryMask m = testing::random_mask(rng, RasterSize(12, 12), 0.6);
      const BinaryMask b = boundary(m);
      CHECK(b == testing::oracle_boundary(m));
      CHECK(is_subset(b, m));
    }
  }
}

TEST_CASE("rle codec") {
  CHECK(rle_encode(mask_from(RasterSize(2, 2), {1, 1, 0, 0})).runs == std::vector<std::uint32_t>{0, 2, 2});
  CHECK(rle_encode(BinaryMask(RasterSize(3, 3))).runs == std::vector<std::uint32_t>{9});
  CHECK_THROWS_AS(rle_decode(RleMask{RasterSize(2, 2), {1, 2}}), Error);

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> density(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 24);
  for (int trial = 0; trial < 1000; ++trial) {
    const RasterSize size(dim(rng), dim(rng));
    BinaryMask m = testing::random_mask(rng, size, density(rng));
    if (trial == 0) std::fill(m.bits.begin(), m.bits.end(), 1);
    if (trial == 1) std::fill(m.bits.begin(), m.bits.end(), 0);
    const RleMask rle = rle_encode(m);
    std::uint64_t sum = 0;
    for (auto r : rle.runs) sum += r;
    CHECK(sum == size.area());
    CHECK(rle_decode(rle) == m);
  }
}

TEST_CASE("rasterize_polyline") {
  SUBCASE("full-width horizontal segment sets one row") {
    const RasterSize size(10, 5);
    const std::vector<Point2> pts{{0.0, 0.5}, {1.0, 0.5}};
    const BinaryMask m = rasterize_polyline(pts, size, 1);
    CHECK(m.count() == 10);
    for (int x = 0; x < 10; ++x) CHECK(m.at(x, 2));
  }
  SUBCASE("single point") {
    const RasterSize size(11, 7);
    const std::vector<Point2> pts{{0.3, 0.6}};
    const BinaryMask m = rasterize_polyline(pts, size, 1);
    CHECK(m.count() == 1);
    CHECK(m.at(3, 4));  // round(0.3*10), round(0.6*6)
  }
  SUBCASE("thickness dilates by disk(thickness - 1)") {
    const std::vector<Point2> pts{{0.5, 0.5}};
    CHECK(rasterize_polyline(pts, RasterSize(9, 9), 2).count() == 5);
  }
  SUBCASE("out-of-range coordinates are rejected") {
    const std::vector<Point2> pts{{1.2, 0.5}};
    CHECK_THROWS_AS(rasterize_polyline(pts, RasterSize(4, 4), 1), Error);
  }
  SUBCASE("diagonal segments follow the line within half a pixel") {
    const RasterSize size(16, 16);
    const std::vector<Point2> diag{{0.0, 0.0}, {1.0, 1.0}};
    BinaryMask expected(size);
    for (int i = 0; i < 16; ++i) expected.set(i, i);
    CHECK(rasterize_polyline(diag, size, 1) == expected);

    std::mt19937_64 rng(37);
    std::uniform_int_distribution<int> u(0, 15);
    for (int trial = 0; trial < 200; ++trial) {
      const Pixel a{u(rng), u(rng)};
      const Pixel b{u(rng), u(rng)};
      const std::vector<Point2> seg{to_normalized(a, size), to_normalized(b, size)};
      const BinaryMask m = rasterize_polyline(seg, size, 1);
      const int dx = b.x - a.x;
      const int dy = b.y - a.y;
      const bool x_major = std::abs(dx) >= std::abs(dy);
      const int steps = std::max(std::abs(dx), std::abs(dy));
      CHECK(m.count() == static_cast<std::size_t>(steps + 1));
      // Exactly one pixel per major coordinate, each within 0.5 of the ideal line.
      for (int s = 0; s <= steps; ++s) {
        int hits = 0;
        for (int y = 0; y < 16; ++y)
          for (int x = 0; x < 16; ++x) {
            if (!m.at(x, y)) continue;
            const int major = x_major ? x : y;
            const int start = x_major ? a.x : a.y;
            const int dir = (x_major ? dx : dy) >= 0 ? 1 : -1;
            if (major != start + dir * s) continue;
            ++hits;
            const double t = steps == 0 ? 0.0 : static_cast<double>(s) / steps;
            const double ideal = x_major ? a.y + t * dy : a.x + t * dx;
            CHECK(std::abs((x_major ? y : x) - ideal) <= 0.5 + 1e-12);
          }
        CHECK(hits == 1);
      }
    }
  }
}
