#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "aquafuse/filters.hpp"
#include "aquafuse/parallel.hpp"
#include "aquafuse/raster.hpp"
#include "aquafuse/reference.hpp"
#include "support.hpp"

namespace aquafuse {
namespace {

using testing::random_depth;
using testing::random_image;
using testing::random_plane;

Image single_pixel_image(double r, double g, double b) { return Image(Extent{8, 8}, r, g, b); }

TEST(Image, RejectsOutOfRangeValues) {
  ColorPlanes planes(Extent{8, 8}, 0.5);
  planes.at(1, 3, 3) = 1.01;
  EXPECT_THROW(Image{planes}, ParameterError);
  planes.at(1, 3, 3) = -1e-9;
  EXPECT_THROW(Image{planes}, ParameterError);
}

TEST(Image, RejectsExtentBelowEight) {
  EXPECT_THROW(Image(Extent{7, 8}, 0.1, 0.2, 0.3), ParameterError);
  EXPECT_THROW(Image(Extent{8, 4}, 0.1, 0.2, 0.3), ParameterError);
  EXPECT_NO_THROW(Image(Extent{8, 8}, 0.1, 0.2, 0.3));
}

TEST(Image, ClampedMapsNanToZero) {
  ColorPlanes planes(Extent{8, 8}, 2.0);
  planes.at(0, 0, 0) = std::numeric_limits<double>::quiet_NaN();
  planes.at(2, 1, 0) = -0.5;
  const Image image = Image::clamped(planes);
  EXPECT_EQ(image.at(0, 0, 0), 0.0);
  EXPECT_EQ(image.at(2, 1, 0), 0.0);
  EXPECT_EQ(image.at(1, 5, 5), 1.0);
}

TEST(DepthMap, RejectsOutOfRange) {
  Plane plane(Extent{8, 8}, 0.5);
  plane.at(0, 2, 2) = 1.5;
  EXPECT_THROW(DepthMap{plane}, ParameterError);
  EXPECT_EQ(DepthMap::clamped(plane).at(2, 2), 1.0);
}

TEST(Rmi, DefinitionExamples) {
  const RmiPlanes a = to_rmi(single_pixel_image(0.2, 0.5, 0.3));
  EXPECT_DOUBLE_EQ(a.r.at(0, 0, 0), 0.2);
  EXPECT_DOUBLE_EQ(a.m.at(0, 0, 0), 0.5);
  EXPECT_NEAR(a.i.at(0, 0, 0), 1.0 / 3.0, 1e-15);

  const RmiPlanes white = to_rmi(single_pixel_image(1, 1, 1));
  EXPECT_EQ(white.r.at(0, 7, 7), 1.0);
  EXPECT_EQ(white.m.at(0, 7, 7), 1.0);
  EXPECT_EQ(white.i.at(0, 7, 7), 1.0);

  const RmiPlanes blue = to_rmi(single_pixel_image(0, 0, 0.8));
  EXPECT_EQ(blue.r.at(0, 4, 4), 0.0);
  EXPECT_EQ(blue.m.at(0, 4, 4), 0.8);
  EXPECT_NEAR(blue.i.at(0, 4, 4), 0.8 / 3.0, 1e-15);
}

TEST(Rmi, MaxPlaneMatchesSourceChannelsExactly) {
  const Image image = random_image(Extent{37, 23}, 11);
  const RmiPlanes rmi = to_rmi(image);
  ASSERT_EQ(rmi.m.extent(), image.extent());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      EXPECT_EQ(rmi.m.at(0, x, y), std::max(image.at(1, x, y), image.at(2, x, y)));
      EXPECT_EQ(rmi.r.at(0, x, y), image.at(0, x, y));
    }
  }
}

// Brute-force median: sort each edge-replicated window.
Plane brute_median(const Plane& in, int kernel) {
  const int r = kernel / 2;
  Plane out(in.extent(), 0.0);
  for (int y = 0; y < in.height(); ++y) {
    for (int x = 0; x < in.width(); ++x) {
      std::vector<double> window;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          window.push_back(in.at(0, std::clamp(x + dx, 0, in.width() - 1), std::clamp(y + dy, 0, in.height() - 1)));
        }
      }
      std::sort(window.begin(), window.end());
      out.at(0, x, y) = window[window.size() / 2];
    }
  }
  return out;
}

TEST(MedianBlur, ConstantMapIsUnchanged) {
  const DepthMap constant(Extent{20, 12}, 0.4);
  EXPECT_EQ(median_blur(constant, 7), constant);
}

TEST(MedianBlur, RemovesSingleImpulse) {
  Plane plane(Extent{9, 9}, 0.0);
  plane.at(0, 4, 4) = 1.0;
  EXPECT_EQ(median_blur(DepthMap(plane), 3), DepthMap(Extent{9, 9}, 0.0));
}

TEST(MedianBlur, MatchesSortedNeighbourhoodOn9x9) {
  const Plane plane = random_plane(Extent{9, 9}, 3);
  EXPECT_EQ(median_blur(plane, 3), brute_median(plane, 3));
}

TEST(MedianBlur, MatchesBruteForceAcrossKernelsAndShapes) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 40; ++t) {
    const int kernel = 1 + 2 * static_cast<int>(rng() % 5);
    const Extent e{kernel + static_cast<int>(rng() % 30), kernel + static_cast<int>(rng() % 30)};
    Plane plane = random_plane(e, rng());
    // Quantise some planes so the window holds many ties.
    if (t % 2 == 0) {
      for (double& v : plane.values()) v = std::round(v * 4.0) / 4.0;
    }
    EXPECT_EQ(median_blur(plane, kernel), brute_median(plane, kernel)) << "kernel " << kernel;
    EXPECT_EQ(median_blur(plane, kernel), reference::median_blur(plane, kernel));
  }
}

TEST(MedianBlur, KernelOneIsIdentity) {
  const DepthMap depth = random_depth(Extent{13, 9}, 8);
  EXPECT_EQ(median_blur(depth, 1), depth);
}

TEST(MedianBlur, OutputStaysWithinInputRange) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Plane plane = random_plane(Extent{16, 16}, seed);
    const auto [lo, hi] = std::ranges::minmax(plane.values());
    const Plane blurred = median_blur(plane, 5);
    for (double v : blurred.values()) {
      EXPECT_GE(v, lo);
      EXPECT_LE(v, hi);
    }
  }
}

TEST(MedianBlur, RejectsEvenOrOversizedKernels) {
  const DepthMap depth(Extent{10, 8}, 0.3);
  EXPECT_THROW(median_blur(depth, 4), ParameterError);
  EXPECT_THROW(median_blur(depth, 0), ParameterError);
  EXPECT_THROW(median_blur(depth, -3), ParameterError);
  EXPECT_THROW(median_blur(depth, 9), ParameterError);
  EXPECT_NO_THROW(median_blur(depth, 7));
}

TEST(MedianBlur, ParallelResultIndependentOfThreadCount) {
  const Plane plane = random_plane(Extent{64, 48}, 21);
  const Plane one = [&] {
    const ThreadLimit limit(1);
    return median_blur(plane, 7);
  }();
  const ThreadLimit limit(4);
  EXPECT_EQ(median_blur(plane, 7), one);
}

TEST(LocalSpaceAverage, ConstantSourceIsFixedPoint) {
  const Plane source(Extent{12, 10}, 0.3);
  int sweeps = -1;
  const Plane a = local_space_average(source, {}, &sweeps);
  for (double v : a.values()) EXPECT_NEAR(v, 0.3, 1e-15);
  EXPECT_LE(sweeps, 1);
}

TEST(LocalSpaceAverage, MatchesSerialReference) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Plane source = random_plane(Extent{33, 21}, seed);
    LocalAverageOptions options;
    options.p = 0.05;
    int parallel_sweeps = 0;
    int serial_sweeps = 0;
    const Plane parallel = local_space_average(source, options, &parallel_sweeps);
    const Plane serial = reference::local_space_average(source, options, &serial_sweeps);
    EXPECT_EQ(parallel_sweeps, serial_sweeps);
    EXPECT_EQ(parallel, serial);
  }
}

TEST(LocalSpaceAverage, TwoRegionTransitionIsSmoothAndBounded) {
  Plane source(Extent{40, 10}, 0.2);
  for (int y = 0; y < 10; ++y) {
    for (int x = 20; x < 40; ++x) source.at(0, x, y) = 0.4;
  }
  const Plane a = local_space_average(source, {});
  for (int y = 0; y < 10; ++y) {
    for (int x = 1; x < 40; ++x) {
      EXPECT_GE(a.at(0, x, y), a.at(0, x - 1, y) - 1e-9) << "not monotone across the boundary";
    }
    EXPECT_GT(a.at(0, 19, y), 0.2);
    EXPECT_LT(a.at(0, 20, y), 0.4);
  }
}

TEST(LocalSpaceAverage, StopsAtSweepLimit) {
  const Plane source = random_plane(Extent{30, 30}, 4);
  LocalAverageOptions options;
  options.tolerance = 0.0;
  options.max_sweeps = 7;
  int sweeps = 0;
  local_space_average(source, options, &sweeps);
  EXPECT_EQ(sweeps, 7);
}

TEST(BlockedReduce, SumIsIndependentOfThreadCount) {
  std::vector<double> values(50'000);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (double& v : values) v = unit(rng) * 1e6;
  auto sum = [&] {
    return blocked_reduce(
        values.size(), 0.0,
        [&](std::size_t b, std::size_t e, double& acc) {
          for (std::size_t k = b; k < e; ++k) acc += values[k];
        },
        [](double& total, double part) { total += part; });
  };
  double single = 0.0;
  {
    const ThreadLimit limit(1);
    single = sum();
  }
  for (int threads : {2, 3, 8}) {
    const ThreadLimit limit(threads);
    EXPECT_EQ(sum(), single);
  }
  EXPECT_NEAR(single, std::accumulate(values.begin(), values.end(), 0.0), 1e-3);
}

TEST(BlockedReduce, EmptyRangeReturnsIdentity) {
  const double v = blocked_reduce(
      0, 42.0, [](std::size_t, std::size_t, double&) {}, [](double& t, double p) { t += p; });
  EXPECT_EQ(v, 42.0);
}

}  // namespace
}  // namespace aquafuse
