#include "umt/core/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "umt/core/error.hpp"

namespace umt {

double quantize8(double v) {
  v = std::clamp(v, 0.0, 1.0);
  return std::floor(v * 255.0 + 0.5) / 255.0;
}

void quantize8_inplace(Image& img) {
  for (auto& v : img.data) v = quantize8(v);
}

Image luminance(const Image& rgb) {
  if (rgb.c == 1) return rgb;
  if (rgb.c != 3) throw ShapeError("luminance: expected 1 or 3 channels");
  Image out(rgb.h, rgb.w, 1);
  for (int y = 0; y < rgb.h; ++y)
    for (int x = 0; x < rgb.w; ++x)
      out.at(y, x) = 0.299 * rgb.at(y, x, 0) + 0.587 * rgb.at(y, x, 1) +
                     0.114 * rgb.at(y, x, 2);
  return out;
}

Image resize_bilinear(const Image& src, int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0) throw ShapeError("resize: non-positive output");
  Image out(out_h, out_w, src.c);
  const double sy = double(src.h) / out_h;
  const double sx = double(src.w) / out_w;
  for (int y = 0; y < out_h; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    int y0 = int(std::floor(fy));
    const double wy = fy - y0;
    int y1 = std::min(y0 + 1, src.h - 1);
    y0 = std::clamp(y0, 0, src.h - 1);
    for (int x = 0; x < out_w; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      int x0 = int(std::floor(fx));
      const double wx = fx - x0;
      int x1 = std::min(x0 + 1, src.w - 1);
      x0 = std::clamp(x0, 0, src.w - 1);
      for (int ch = 0; ch < src.c; ++ch) {
        const double top = src.at(y0, x0, ch) * (1 - wx) + src.at(y0, x1, ch) * wx;
        const double bot = src.at(y1, x0, ch) * (1 - wx) + src.at(y1, x1, ch) * wx;
        out.at(y, x, ch) = top * (1 - wy) + bot * wy;
      }
    }
  }
  return out;
}

Image crop(const Image& src, int y, int x, int h, int w) {
  if (y < 0 || x < 0 || y + h > src.h || x + w > src.w || h <= 0 || w <= 0)
    throw ShapeError("crop: window outside image");
  Image out(h, w, src.c);
  for (int yy = 0; yy < h; ++yy)
    for (int xx = 0; xx < w; ++xx)
      for (int ch = 0; ch < src.c; ++ch)
        out.at(yy, xx, ch) = src.at(y + yy, x + xx, ch);
  return out;
}

Image dilate(const Image& mask, int radius) {
  if (mask.c != 1) throw ShapeError("dilate: single-channel mask expected");
  Image out(mask.h, mask.w, 1);
  for (int y = 0; y < mask.h; ++y)
    for (int x = 0; x < mask.w; ++x) {
      double v = 0.0;
      for (int dy = -radius; dy <= radius && v == 0.0; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy >= 0 && yy < mask.h && xx >= 0 && xx < mask.w &&
              mask.at(yy, xx) > 0.5) {
            v = 1.0;
            break;
          }
        }
      out.at(y, x) = v;
    }
  return out;
}

namespace {

void atomic_write_bytes(const std::string& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for write: " + tmp);
    f.write(bytes.data(), std::streamsize(bytes.size()));
    if (!f) {
      f.close();
      fs::remove(tmp);
      throw IoError("short write: " + tmp);
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("rename failed: " + path + ": " + ec.message());
  }
}

}  // namespace

void write_raster(const std::string& path, const Image& img) {
  if (img.c != 1 && img.c != 3) throw ShapeError("write_raster: c must be 1 or 3");
  std::ostringstream os;
  os << (img.c == 3 ? "P6" : "P5") << "\n" << img.w << " " << img.h << "\n255\n";
  std::string body;
  body.reserve(img.size());
  for (double v : img.data) {
    const int q = int(std::clamp(std::floor(v * 255.0 + 0.5), 0.0, 255.0));
    body.push_back(char(static_cast<unsigned char>(q)));
  }
  atomic_write_bytes(path, os.str() + body);
}

Image read_raster(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::string magic;
  f >> magic;
  if (magic != "P5" && magic != "P6") throw IoError("not a PGM/PPM file: " + path);
  int w = 0, h = 0, maxv = 0;
  f >> w >> h >> maxv;
  if (!f || w <= 0 || h <= 0 || maxv != 255) throw IoError("bad raster header: " + path);
  f.get();  // single whitespace after header
  const int c = magic == "P6" ? 3 : 1;
  Image img(h, w, c);
  std::vector<char> buf(img.size());
  f.read(buf.data(), std::streamsize(buf.size()));
  if (std::size_t(f.gcount()) != buf.size()) throw IoError("truncated raster: " + path);
  for (std::size_t i = 0; i < buf.size(); ++i)
    img.data[i] = double(static_cast<unsigned char>(buf[i])) / 255.0;
  return img;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  atomic_write_bytes(path, content);
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace umt
