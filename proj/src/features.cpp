#include "ivos/features.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "ivos/error.hpp"

namespace ivos {

static_assert(std::endian::native == std::endian::little, "feature files assume a little-endian host");

void FeatureMap::validate() const {
  if (factor < 1) throw Error(ErrorCode::invalid_argument, "feature factor must be >= 1");
  if (dims < 1) throw Error(ErrorCode::invalid_argument, "feature map needs at least one dimension");
  if (grid != downsampled(image, factor)) throw Error(ErrorCode::size_mismatch, "feature grid does not match factor");
  for (const auto& f : data) {
    if (f.size() != grid.area() * static_cast<std::size_t>(dims)) {
      throw Error(ErrorCode::size_mismatch, "feature frame has the wrong number of values");
    }
  }
}

RasterSize downsampled(RasterSize image, int factor) {
  if (factor < 1) throw Error(ErrorCode::invalid_argument, "feature factor must be >= 1");
  return RasterSize((image.width + factor - 1) / factor, (image.height + factor - 1) / factor);
}

FeatureMap default_features(std::span<const RgbImage> frames) {
  if (frames.empty()) throw Error(ErrorCode::invalid_argument, "no frames to featurize");
  FeatureMap m;
  m.image = frames.front().size;
  m.grid = m.image;
  m.dims = 6;
  const int w = m.image.width;
  const int h = m.image.height;
  const auto T = static_cast<int>(frames.size());
  const std::size_t n = m.image.area();
  for (int t = 0; t < T; ++t) {
    const RgbImage& img = frames[static_cast<std::size_t>(t)];
    if (img.size != m.image) throw Error(ErrorCode::size_mismatch, "frames differ in size");
    std::vector<float> f(n * 6);
    const float tv = T > 1 ? static_cast<float>(t) / static_cast<float>(T - 1) : 0.0f;
    for (int y = 0; y < h; ++y) {
      const float yv = h > 1 ? static_cast<float>(y) / static_cast<float>(h - 1) : 0.0f;
      for (int x = 0; x < w; ++x) {
        const std::size_t i = m.image.index(x, y);
        for (int c = 0; c < 3; ++c) f[static_cast<std::size_t>(c) * n + i] = static_cast<float>(img.channel(x, y, c)) / 255.0f;
        f[3 * n + i] = w > 1 ? static_cast<float>(x) / static_cast<float>(w - 1) : 0.0f;
        f[4 * n + i] = yv;
        f[5 * n + i] = tv;
      }
    }
    m.data.push_back(std::move(f));
  }
  return m;
}

namespace {

constexpr char kMagic[4] = {'I', 'V', 'F', 'M'};

std::uint32_t read_u32(std::istream& in, const std::filesystem::path& path) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), 4)) throw Error(ErrorCode::format, "truncated feature header: " + path.string());
  return v;
}

void write_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

}  // namespace

FeatureMap load_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open feature file " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(ErrorCode::format, "not a feature file: " + path.string());
  }
  const std::uint32_t frames = read_u32(in, path);
  FeatureMap m;
  m.dims = static_cast<int>(read_u32(in, path));
  m.factor = static_cast<int>(read_u32(in, path));
  const auto iw = static_cast<int>(read_u32(in, path));
  const auto ih = static_cast<int>(read_u32(in, path));
  const auto gw = static_cast<int>(read_u32(in, path));
  const auto gh = static_cast<int>(read_u32(in, path));
  if (frames == 0 || m.dims < 1 || m.factor < 1 || iw < 1 || ih < 1 || gw < 1 || gh < 1) {
    throw Error(ErrorCode::format, "bad feature header: " + path.string());
  }
  m.image = RasterSize(iw, ih);
  m.grid = RasterSize(gw, gh);
  if (m.grid != downsampled(m.image, m.factor)) {
    throw Error(ErrorCode::format, "feature grid does not match image size and factor: " + path.string());
  }
  const std::size_t cells = m.grid.area();
  const auto dims = static_cast<std::size_t>(m.dims);
  std::vector<float> interleaved(cells * dims);
  for (std::uint32_t t = 0; t < frames; ++t) {
    if (!in.read(reinterpret_cast<char*>(interleaved.data()), static_cast<std::streamsize>(interleaved.size() * 4))) {
      throw Error(ErrorCode::format, "truncated feature body at frame " + std::to_string(t) + ": " + path.string());
    }
    std::vector<float> planar(cells * dims);
    for (std::size_t c = 0; c < cells; ++c)
      for (std::size_t d = 0; d < dims; ++d) planar[d * cells + c] = interleaved[c * dims + d];
    m.data.push_back(std::move(planar));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::format, "trailing bytes after feature body: " + path.string());
  }
  return m;
}

void save_feature_file(const std::filesystem::path& path, const FeatureMap& m) {
  m.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write feature file " + path.string());
  out.write(kMagic, 4);
  for (const int v : {m.frames(), m.dims, m.factor, m.image.width, m.image.height, m.grid.width, m.grid.height}) {
    write_u32(out, static_cast<std::uint32_t>(v));
  }
  const std::size_t cells = m.grid.area();
  const auto dims = static_cast<std::size_t>(m.dims);
  std::vector<float> interleaved(cells * dims);
  for (const auto& planar : m.data) {
    for (std::size_t c = 0; c < cells; ++c)
      for (std::size_t d = 0; d < dims; ++d) interleaved[c * dims + d] = planar[d * cells + c];
    out.write(reinterpret_cast<const char*>(interleaved.data()), static_cast<std::streamsize>(interleaved.size() * 4));
  }
  if (!out) throw Error(ErrorCode::io, "write failed: " + path.string());
}

}  // namespace ivos
