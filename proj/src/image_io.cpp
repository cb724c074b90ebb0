#include "nave/image_io.hpp"

#include <cstring>

#include <png.h>

#include "nave/error.hpp"

namespace nave {

RgbImage read_png(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.string().c_str())) {
    const std::string msg = img.message;
    png_image_free(&img);
    if (!std::filesystem::exists(path)) throw IoError("cannot open '" + path.string() + "'");
    throw FormatError(path.string() + ": " + msg);
  }
  img.format = PNG_FORMAT_RGB;
  RgbImage out(img.height, img.width);
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw FormatError(path.string() + ": " + msg);
  }
  return out;
}

void write_png(const RgbImage& image, const std::filesystem::path& path) {
  if (image.pixels.size() != image.height * image.width * 3 || image.height == 0 || image.width == 0) {
    throw ArgumentError("write_png: image buffer does not match its size");
  }
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.string().c_str(), 0, image.pixels.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw IoError("cannot write '" + path.string() + "': " + msg);
  }
}

}  // namespace nave
