#include "aquafuse/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <sstream>
#include <string>

namespace aquafuse::io {
namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::ranges::transform(ext, ext.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext;
}

cv::Mat load(const std::filesystem::path& path, int flags) {
  if (!std::filesystem::exists(path)) throw IoError("file not found: " + path.string());
  cv::Mat mat;
  try {
    mat = cv::imread(path.string(), flags);
  } catch (const cv::Exception& e) {
    throw IoError("cannot decode " + path.string() + ": " + e.what());
  }
  if (mat.empty()) throw IoError("cannot decode " + path.string());
  return mat;
}

void store(const std::filesystem::path& path, const cv::Mat& mat, const std::vector<int>& params = {}) {
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), mat, params);
  } catch (const cv::Exception& e) {
    throw IoError("cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) throw IoError("cannot write " + path.string());
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

}  // namespace

double srgb_to_linear(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double v) {
  return v <= 0.0031308 ? v * 12.92 : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

Image read_image(const std::filesystem::path& path, ColorEncoding encoding) {
  const cv::Mat mat = load(path, cv::IMREAD_ANYDEPTH | cv::IMREAD_COLOR);
  const double scale = mat.depth() == CV_16U ? 1.0 / 65535.0 : 1.0 / 255.0;
  cv::Mat bgr;
  mat.convertTo(bgr, CV_64FC3, scale);
  if (bgr.cols < kMinImageSide || bgr.rows < kMinImageSide) {
    throw ParameterError("image " + path.string() + " is smaller than 8 x 8");
  }
  ColorPlanes planes(Extent{bgr.cols, bgr.rows}, 0.0);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3d>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      for (int c = 0; c < 3; ++c) {
        double v = row[x][2 - c];
        if (encoding.srgb_linearize) v = srgb_to_linear(v);
        planes.at(static_cast<std::size_t>(c), x, y) = v;
      }
    }
  }
  return Image::clamped(std::move(planes));
}

void write_image(const std::filesystem::path& path, const Image& image, ColorEncoding encoding) {
  cv::Mat bgr(image.height(), image.width(), CV_8UC3);
  for (int y = 0; y < image.height(); ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        double v = image.at(static_cast<std::size_t>(c), x, y);
        if (encoding.srgb_linearize) v = linear_to_srgb(v);
        row[x][2 - c] = to_byte(v);
      }
    }
  }
  const std::string ext = lower_extension(path);
  if (ext == ".jpg" || ext == ".jpeg") {
    store(path, bgr, {cv::IMWRITE_JPEG_QUALITY, 95});
  } else {
    store(path, bgr, {cv::IMWRITE_PNG_COMPRESSION, 6});
  }
}

void write_pfm(const std::filesystem::path& path, const DepthMap& depth) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "Pf\n" << depth.width() << ' ' << depth.height() << "\n-1.0\n";
  std::vector<char> row(static_cast<std::size_t>(depth.width()) * 4);
  for (int y = depth.height() - 1; y >= 0; --y) {
    for (int x = 0; x < depth.width(); ++x) {
      auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(depth.at(x, y)));
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
      std::memcpy(row.data() + static_cast<std::size_t>(x) * 4, &bits, 4);
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw IoError("cannot write " + path.string());
}

DepthMap read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("file not found: " + path.string());
  std::string magic;
  int width = 0, height = 0;
  double scale = 0.0;
  in >> magic >> width >> height >> scale;
  in.get();
  if (!in || magic != "Pf" || width <= 0 || height <= 0 || scale == 0.0) {
    throw IoError("not a single-channel PFM: " + path.string());
  }
  const bool little = scale < 0.0;
  Plane plane(Extent{width, height}, 0.0);
  std::vector<char> row(static_cast<std::size_t>(width) * 4);
  for (int y = height - 1; y >= 0; --y) {
    if (!in.read(row.data(), static_cast<std::streamsize>(row.size()))) throw IoError("truncated PFM: " + path.string());
    for (int x = 0; x < width; ++x) {
      std::uint32_t bits = 0;
      std::memcpy(&bits, row.data() + static_cast<std::size_t>(x) * 4, 4);
      if (little != (std::endian::native == std::endian::little)) bits = __builtin_bswap32(bits);
      plane.at(0, x, y) = static_cast<double>(std::bit_cast<float>(bits));
    }
  }
  return DepthMap(std::move(plane));
}

void write_depth_png16(const std::filesystem::path& path, const DepthMap& depth) {
  cv::Mat mat(depth.height(), depth.width(), CV_16UC1);
  for (int y = 0; y < depth.height(); ++y) {
    auto* row = mat.ptr<std::uint16_t>(y);
    for (int x = 0; x < depth.width(); ++x) {
      row[x] = static_cast<std::uint16_t>(std::lround(depth.at(x, y) * 65535.0));
    }
  }
  store(path, mat);
}

DepthMap read_depth_png16(const std::filesystem::path& path) {
  const cv::Mat mat = load(path, cv::IMREAD_ANYDEPTH | cv::IMREAD_GRAYSCALE);
  const double scale = mat.depth() == CV_16U ? 1.0 / 65535.0 : 1.0 / 255.0;
  cv::Mat values;
  mat.convertTo(values, CV_64F, scale);
  Plane plane(Extent{values.cols, values.rows}, 0.0);
  for (int y = 0; y < values.rows; ++y) {
    for (int x = 0; x < values.cols; ++x) plane.at(0, x, y) = values.at<double>(y, x);
  }
  return DepthMap::clamped(std::move(plane));
}

DepthMap read_depth(const std::filesystem::path& path) {
  return lower_extension(path) == ".pfm" ? read_pfm(path) : read_depth_png16(path);
}

}  // namespace aquafuse::io
