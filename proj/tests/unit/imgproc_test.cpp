/* Copyright 2026 The nodulegan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Unit and property tests for diffusion, intensity mapping, resizing and I/O.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"
#include "nodulegan/imgproc/diffusion.hpp"
#include "nodulegan/imgproc/image_io.hpp"
#include "nodulegan/imgproc/intensity.hpp"
#include "nodulegan/imgproc/resize.hpp"
#include "temp_dir.hpp"

using namespace nodulegan::imgproc;

namespace {

Image random_image(std::mt19937_64& rng, std::size_t w, std::size_t h, double lo = 0.0, double hi = 255.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Image img(w, h);
  for (double& v : img.pixels) v = dist(rng);
  return img;
}

double pixel_sum(const Image& img) {
  double s = 0;
  for (double v : img.pixels) s += v;
  return s;
}

double total_variation(const Image& img) {
  double tv = 0;
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x) {
      if (x + 1 < img.width) tv += std::abs(img.at(x + 1, y) - img.at(x, y));
      if (y + 1 < img.height) tv += std::abs(img.at(x, y + 1) - img.at(x, y));
    }
  return tv;
}

// Same explicit stencil with unit conductance: plain heat equation.
Image linear_diffusion(Image img, std::size_t iterations, double lambda) {
  for (std::size_t it = 0; it < iterations; ++it) {
    Image next = img;
    for (std::size_t y = 0; y < img.height; ++y)
      for (std::size_t x = 0; x < img.width; ++x) {
        const double c = img.at(x, y);
        double u = 0;
        if (y > 0) u += img.at(x, y - 1) - c;
        if (y + 1 < img.height) u += img.at(x, y + 1) - c;
        if (x > 0) u += img.at(x - 1, y) - c;
        if (x + 1 < img.width) u += img.at(x + 1, y) - c;
        next.at(x, y) = c + lambda * u;
      }
    img = next;
  }
  return img;
}

}  // namespace

TEST_SUITE("perona_malik") {
  TEST_CASE("constant image is a fixed point") {
    for (auto kind : {Conductance::kExponential, Conductance::kRational}) {
      Image img(9, 7, 42.5);
      DiffusionConfig cfg;
      cfg.iterations = 25;
      cfg.conductance = kind;
      Image out = perona_malik(img, cfg);
      for (double v : out.pixels) CHECK(std::abs(v - 42.5) < 1e-12);
    }
  }

  TEST_CASE("conductance is one at zero gradient") {
    CHECK(conductance(0.0, 3.0, Conductance::kExponential) == 1.0);
    CHECK(conductance(0.0, 3.0, Conductance::kRational) == 1.0);
    CHECK(conductance(2.0, 2.0, Conductance::kRational) == doctest::Approx(0.5));
    CHECK(conductance(2.0, 2.0, Conductance::kExponential) == doctest::Approx(std::exp(-1.0)));
  }

  TEST_CASE("single step on a 3x3 impulse matches the hand-stepped update") {
    Image img(3, 3, 0.0);
    img.at(1, 1) = 9.0;
    DiffusionConfig cfg{1, 1.0, 0.25, Conductance::kRational};
    Image out = perona_malik(img, cfg);
    // g(9) = 1/82. Centre loses four fluxes of 9/82, each edge-adjacent pixel
    // gains one, corners see only zero differences.
    const double centre = 9.0 - 0.25 * 4.0 * 9.0 / 82.0;
    const double edge = 0.25 * 9.0 / 82.0;
    const double expected[9] = {0, edge, 0, edge, centre, edge, 0, edge, 0};
    for (std::size_t i = 0; i < 9; ++i) CHECK(out.pixels[i] == expected[i]);
  }

  TEST_CASE("max principle over 1000 random images") {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<std::size_t> side(2, 16), iters(1, 10);
    std::uniform_real_distribution<double> kappa(1.0, 80.0), lambda(0.01, 0.25);
    for (int trial = 0; trial < 1000; ++trial) {
      Image img = random_image(rng, side(rng), side(rng));
      DiffusionConfig cfg{iters(rng), kappa(rng), lambda(rng),
                          trial % 2 ? Conductance::kRational : Conductance::kExponential};
      const auto [lo, hi] = std::minmax_element(img.pixels.begin(), img.pixels.end());
      Image out = perona_malik(img, cfg);
      for (double v : out.pixels) {
        CHECK(v >= *lo - 1e-9);
        CHECK(v <= *hi + 1e-9);
      }
    }
  }

  TEST_CASE("pixel sum is conserved every iteration") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 50; ++trial) {
      Image img = random_image(rng, 56, 56);
      DiffusionConfig cfg{1, 20.0, 0.25, trial % 2 ? Conductance::kRational : Conductance::kExponential};
      double before = pixel_sum(img);
      for (int it = 0; it < 10; ++it) {
        img = perona_malik(img, cfg);
        const double after = pixel_sum(img);
        CHECK(std::abs(after - before) < 1e-8);
        before = after;
      }
    }
  }

  TEST_CASE("total variation never increases") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 200; ++trial) {
      Image img = random_image(rng, 12, 12);
      DiffusionConfig cfg{1, 30.0, 0.25, trial % 2 ? Conductance::kRational : Conductance::kExponential};
      double tv = total_variation(img);
      for (int it = 0; it < 5; ++it) {
        img = perona_malik(img, cfg);
        const double next = total_variation(img);
        CHECK(next <= tv + 1e-9);
        tv = next;
      }
    }
  }

  TEST_CASE("step edge keeps more contrast than linear diffusion") {
    Image step(32, 16, 20.0);
    for (std::size_t y = 0; y < 16; ++y)
      for (std::size_t x = 16; x < 32; ++x) step.at(x, y) = 120.0;
    DiffusionConfig cfg{20, 10.0, 0.25, Conductance::kExponential};
    Image pm = perona_malik(step, cfg);
    Image lin = linear_diffusion(step, 20, 0.25);
    const double pm_contrast = pm.at(16, 8) - pm.at(15, 8);
    const double lin_contrast = lin.at(16, 8) - lin.at(15, 8);
    CHECK(pm_contrast > lin_contrast);
    CHECK(pm_contrast > 99.0);
  }

  TEST_CASE("invalid configuration and pixels are rejected") {
    Image img(4, 4, 1.0);
    CHECK_THROWS_AS(perona_malik(img, {1, 10.0, 0.3, Conductance::kExponential}), ImageError);
    CHECK_THROWS_AS(perona_malik(img, {1, 0.0, 0.2, Conductance::kExponential}), ImageError);
    img.at(2, 2) = std::nan("");
    CHECK_THROWS_AS(perona_malik(img, DiffusionConfig{}), ImageError);
  }
}

TEST_SUITE("intensity") {
  TEST_CASE("normalize endpoints") {
    CHECK(normalize_value(0) == -1.0);
    CHECK(normalize_value(255) == 1.0);
    CHECK(normalize_value(127.5) == 0.0);
  }

  TEST_CASE("denormalize endpoints and clamping") {
    CHECK(denormalize_value(-1.0) == 0);
    CHECK(denormalize_value(1.0) == 255);
    CHECK(denormalize_value(5.0) == 255);
    CHECK(denormalize_value(-5.0) == 0);
    CHECK(denormalize_value(0.0) == 128);  // 127.5 rounds half-up
  }

  TEST_CASE("to_gray8 rounds half-up and clamps") {
    Image img(5, 1);
    img.pixels = {-3.0, 0.49, 0.5, 254.5, 300.0};
    CHECK(to_gray8(img).pixels == std::vector<std::uint8_t>{0, 0, 1, 255, 255});
    GrayImage8 levels(16, 16);
    for (std::size_t i = 0; i < 256; ++i) levels.pixels[i] = static_cast<std::uint8_t>(i);
    CHECK(to_gray8(to_real(levels)).pixels == levels.pixels);
  }

  TEST_CASE("round trip over all 256 levels") {
    GrayImage8 img(16, 16);
    for (std::size_t i = 0; i < 256; ++i) img.pixels[i] = static_cast<std::uint8_t>(i);
    GrayImage8 back = denormalize(normalize_to_model_range(img));
    CHECK(back.pixels == img.pixels);
  }
}

TEST_SUITE("resize") {
  TEST_CASE("56x56 input is unchanged") {
    std::mt19937_64 rng(24);
    Image img = random_image(rng, 56, 56);
    Image out = center_crop_resize(img);
    CHECK(out.pixels == img.pixels);
  }

  TEST_CASE("constant 112x112 stays constant") {
    Image img(112, 112, 77.0);
    Image out = center_crop_resize(img);
    REQUIRE(out.width == 56);
    for (double v : out.pixels) CHECK(v == doctest::Approx(77.0).epsilon(1e-12));
  }

  TEST_CASE("64x48 ramp matches the bilinear formula") {
    // f(x, y) = 2x + 3y + 1 is reproduced exactly by bilinear interpolation
    // away from the clamped border, so the oracle is analytic.
    Image img(64, 48);
    for (std::size_t y = 0; y < 48; ++y)
      for (std::size_t x = 0; x < 64; ++x) img.at(x, y) = 2.0 * x + 3.0 * y + 1.0;
    Image out = center_crop_resize(img);
    REQUIRE(out.width == 56);
    REQUIRE(out.height == 56);
    for (std::size_t y = 0; y < 56; ++y)
      for (std::size_t x = 0; x < 56; ++x) {
        const double sx = std::clamp((x + 0.5) * 48.0 / 56.0 - 0.5, 0.0, 47.0);
        const double sy = std::clamp((y + 0.5) * 48.0 / 56.0 - 0.5, 0.0, 47.0);
        const double expected = 2.0 * (8.0 + sx) + 3.0 * sy + 1.0;
        CHECK(std::abs(out.at(x, y) - expected) < 1e-6);
      }
  }

  TEST_CASE("degenerate and tiny sources are rejected") {
    CHECK_THROWS_AS(center_crop_resize(Image(1, 40)), ImageError);
    CHECK_THROWS_AS(center_crop_resize(Image(7, 40)), ImageError);
    CHECK_NOTHROW(center_crop_resize(Image(8, 8)));
  }
}

TEST_SUITE("image_io") {
  TEST_CASE("PNG and PGM round trips") {
    nodulegan::testing::TempDir dir;
    std::mt19937_64 rng(25);
    GrayImage8 img(13, 9);
    std::uniform_int_distribution<int> level(0, 255);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(level(rng));

    write_image(dir / "a.png", img);
    write_image(dir / "a.pgm", img);
    for (const char* name : {"a.png", "a.pgm"}) {
      GrayImage8 back = read_image(dir / name);
      CHECK(back.width == 13);
      CHECK(back.height == 9);
      CHECK(back.pixels == img.pixels);
    }
    CHECK(decode_png(encode_png(img)).pixels == img.pixels);
  }

  TEST_CASE("PGM with comments and a smaller maxval") {
    nodulegan::testing::TempDir dir;
    std::ofstream out(dir / "c.pgm", std::ios::binary);
    out << "P5\n# comment line\n2 1\n# another\n15\n";
    out.put(static_cast<char>(0));
    out.put(static_cast<char>(15));
    out.close();
    GrayImage8 img = read_image(dir / "c.pgm");
    CHECK(img.pixels == std::vector<std::uint8_t>{0, 255});
  }

  TEST_CASE("garbage is rejected") {
    nodulegan::testing::TempDir dir;
    std::ofstream(dir / "x.png") << "not an image";
    CHECK_THROWS_AS(read_image(dir / "x.png"), ImageError);
    CHECK_THROWS_AS(read_image(dir / "missing.png"), ImageError);
  }
}
