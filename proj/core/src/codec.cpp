#include "cxrseg/codec.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cstring>
#include <string>

#include "cxrseg/error.hpp"

namespace cxrseg::codec {

namespace {

constexpr std::array<std::uint8_t, 8> kPngSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

std::uint32_t read_le32(std::span<const std::uint8_t> b, std::size_t off) {
  return std::uint32_t{b[off]} | (std::uint32_t{b[off + 1]} << 8) |
         (std::uint32_t{b[off + 2]} << 16) | (std::uint32_t{b[off + 3]} << 24);
}

std::uint16_t read_le16(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_le16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::uint32_t channels_for_color_type(std::uint8_t color_type, std::size_t offset) {
  switch (color_type) {
    case 0: return 1;
    case 2: return 3;
    case 4: return 2;
    case 6: return 4;
    case 3: throw UnsupportedFormatError("palette PNG (color type 3) is not supported");
    default: throw DecodeError("invalid PNG color type " + std::to_string(color_type), offset);
  }
}

std::uint8_t paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a);
  const int pb = std::abs(p - b);
  const int pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return static_cast<std::uint8_t>(a);
  if (pb <= pc) return static_cast<std::uint8_t>(b);
  return static_cast<std::uint8_t>(c);
}

}  // namespace

bool looks_like_png(std::span<const std::uint8_t> bytes) noexcept {
  return bytes.size() >= kPngSignature.size() &&
         std::equal(kPngSignature.begin(), kPngSignature.end(), bytes.begin());
}

bool looks_like_bmp(std::span<const std::uint8_t> bytes) noexcept {
  return bytes.size() >= 2 && bytes[0] == 'B' && bytes[1] == 'M';
}

RawImage decode_png(std::span<const std::uint8_t> bytes) {
  if (!looks_like_png(bytes)) throw DecodeError("missing PNG signature", 0);

  RawImage img;
  bool have_header = false;
  bool have_end = false;
  std::size_t first_idat = 0;
  std::vector<std::uint8_t> compressed;

  std::size_t pos = kPngSignature.size();
  while (pos < bytes.size() && !have_end) {
    if (bytes.size() - pos < 12) throw DecodeError("truncated PNG chunk header", pos);
    const std::uint32_t length = read_be32(bytes, pos);
    if (length > bytes.size() - pos - 12) throw DecodeError("PNG chunk length exceeds file size", pos);
    const std::size_t type_off = pos + 4;
    const std::size_t data_off = pos + 8;
    const std::string type(reinterpret_cast<const char*>(bytes.data() + type_off), 4);
    const std::uint32_t stored_crc = read_be32(bytes, data_off + length);
    const auto crc = static_cast<std::uint32_t>(
        crc32(crc32(0L, Z_NULL, 0), bytes.data() + type_off, length + 4));
    if (crc != stored_crc) throw DecodeError("CRC mismatch in PNG chunk " + type, data_off + length);

    if (!have_header && type != "IHDR") throw DecodeError("first PNG chunk is not IHDR", type_off);
    if (type == "IHDR") {
      if (length != 13) throw DecodeError("IHDR chunk must be 13 bytes", pos);
      img.width = read_be32(bytes, data_off);
      img.height = read_be32(bytes, data_off + 4);
      const std::uint8_t depth = bytes[data_off + 8];
      const std::uint8_t color = bytes[data_off + 9];
      if (img.width == 0 || img.height == 0) throw DecodeError("zero PNG dimension", data_off);
      img.channels = channels_for_color_type(color, data_off + 9);
      if (depth != 8 && depth != 16) {
        throw UnsupportedFormatError("unsupported PNG bit depth " + std::to_string(depth));
      }
      img.bit_depth = depth;
      if (bytes[data_off + 10] != 0) throw DecodeError("unknown PNG compression method", data_off + 10);
      if (bytes[data_off + 11] != 0) throw DecodeError("unknown PNG filter method", data_off + 11);
      if (bytes[data_off + 12] != 0) throw UnsupportedFormatError("interlaced PNG is not supported");
      have_header = true;
    } else if (type == "IDAT") {
      if (compressed.empty()) first_idat = data_off;
      compressed.insert(compressed.end(), bytes.begin() + static_cast<std::ptrdiff_t>(data_off),
                        bytes.begin() + static_cast<std::ptrdiff_t>(data_off + length));
    } else if (type == "IEND") {
      have_end = true;
    } else if ((bytes[type_off] & 0x20) == 0) {
      throw UnsupportedFormatError("unknown critical PNG chunk " + type);
    }
    pos = data_off + length + 4;
  }
  if (!have_end) throw DecodeError("PNG ends without IEND chunk", pos);
  if (compressed.empty()) throw DecodeError("PNG has no IDAT data", pos);

  const std::size_t bytes_per_sample = img.bit_depth / 8;
  const std::size_t bpp = img.channels * bytes_per_sample;
  const std::size_t stride = static_cast<std::size_t>(img.width) * bpp;
  const std::size_t expected = (stride + 1) * img.height;

  std::vector<std::uint8_t> raw(expected);
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) throw Error("zlib inflateInit failed");
  zs.next_in = compressed.data();
  zs.avail_in = static_cast<uInt>(compressed.size());
  zs.next_out = raw.data();
  zs.avail_out = static_cast<uInt>(raw.size());
  const int rc = inflate(&zs, Z_FINISH);
  const std::size_t produced = raw.size() - zs.avail_out;
  const std::size_t consumed = compressed.size() - zs.avail_in;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected) {
    throw DecodeError("corrupt or short PNG image data", first_idat + consumed);
  }

  std::vector<std::uint8_t> cur(stride);
  std::vector<std::uint8_t> prev(stride, 0);
  img.samples.resize(static_cast<std::size_t>(img.width) * img.height * img.channels);
  for (std::uint32_t y = 0; y < img.height; ++y) {
    const std::uint8_t* row = raw.data() + y * (stride + 1);
    const std::uint8_t filter = row[0];
    for (std::size_t i = 0; i < stride; ++i) {
      const int x = row[1 + i];
      const int a = i >= bpp ? cur[i - bpp] : 0;
      const int b = prev[i];
      const int c = i >= bpp ? prev[i - bpp] : 0;
      switch (filter) {
        case 0: cur[i] = static_cast<std::uint8_t>(x); break;
        case 1: cur[i] = static_cast<std::uint8_t>(x + a); break;
        case 2: cur[i] = static_cast<std::uint8_t>(x + b); break;
        case 3: cur[i] = static_cast<std::uint8_t>(x + ((a + b) >> 1)); break;
        case 4: cur[i] = static_cast<std::uint8_t>(x + paeth(a, b, c)); break;
        default:
          throw DecodeError("invalid PNG filter type " + std::to_string(filter) + " on row " +
                                std::to_string(y),
                            first_idat);
      }
    }
    auto* out = img.samples.data() + static_cast<std::size_t>(y) * img.width * img.channels;
    if (bytes_per_sample == 1) {
      std::copy(cur.begin(), cur.end(), out);
    } else {
      for (std::size_t i = 0; i < stride / 2; ++i) {
        out[i] = static_cast<std::uint16_t>((cur[2 * i] << 8) | cur[2 * i + 1]);
      }
    }
    std::swap(cur, prev);
  }
  return img;
}

RawImage decode_bmp(std::span<const std::uint8_t> bytes) {
  if (!looks_like_bmp(bytes)) throw DecodeError("missing BMP signature", 0);
  if (bytes.size() < 54) throw DecodeError("truncated BMP header", bytes.size());
  const std::uint32_t data_offset = read_le32(bytes, 10);
  const std::uint32_t dib_size = read_le32(bytes, 14);
  if (dib_size < 40) throw UnsupportedFormatError("BMP core headers are not supported");
  const auto width = static_cast<std::int32_t>(read_le32(bytes, 18));
  const auto height_signed = static_cast<std::int32_t>(read_le32(bytes, 22));
  const std::uint16_t bpp = read_le16(bytes, 28);
  const std::uint32_t compression = read_le32(bytes, 30);
  if (width <= 0 || height_signed == 0) throw DecodeError("invalid BMP dimensions", 18);
  if (compression != 0) throw UnsupportedFormatError("compressed BMP is not supported");
  if (bpp != 8 && bpp != 24 && bpp != 32) {
    throw UnsupportedFormatError("unsupported BMP bit depth " + std::to_string(bpp));
  }
  const bool top_down = height_signed < 0;
  const auto height = static_cast<std::uint32_t>(top_down ? -static_cast<std::int64_t>(height_signed)
                                                          : height_signed);

  std::vector<std::array<std::uint8_t, 3>> palette;
  bool gray_palette = true;
  if (bpp == 8) {
    std::uint32_t colors = read_le32(bytes, 46);
    if (colors == 0) colors = 256;
    const std::size_t pal_off = 14 + dib_size;
    if (pal_off + 4 * static_cast<std::size_t>(colors) > bytes.size()) {
      throw DecodeError("truncated BMP palette", pal_off);
    }
    palette.resize(colors);
    for (std::uint32_t i = 0; i < colors; ++i) {
      const std::size_t o = pal_off + 4 * i;
      palette[i] = {bytes[o + 2], bytes[o + 1], bytes[o]};
      gray_palette = gray_palette && palette[i][0] == palette[i][1] && palette[i][1] == palette[i][2];
    }
  }

  RawImage img;
  img.width = static_cast<std::uint32_t>(width);
  img.height = height;
  img.bit_depth = 8;
  img.channels = bpp == 8 ? (gray_palette ? 1 : 3) : bpp == 32 ? 4 : 3;
  const std::size_t bytes_pp = bpp / 8;
  const std::size_t stride = (static_cast<std::size_t>(img.width) * bytes_pp + 3) & ~std::size_t{3};
  if (data_offset > bytes.size() || stride * height > bytes.size() - data_offset) {
    throw DecodeError("BMP pixel array extends past end of file", std::min<std::size_t>(data_offset, bytes.size()));
  }
  img.samples.resize(static_cast<std::size_t>(img.width) * height * img.channels);
  for (std::uint32_t y = 0; y < height; ++y) {
    const std::uint32_t src_row = top_down ? y : height - 1 - y;
    const std::size_t row_off = data_offset + src_row * stride;
    for (std::uint32_t x = 0; x < img.width; ++x) {
      const std::size_t o = row_off + x * bytes_pp;
      auto* out = img.samples.data() + (static_cast<std::size_t>(y) * img.width + x) * img.channels;
      if (bpp == 8) {
        const std::uint8_t index = bytes[o];
        if (index >= palette.size()) throw DecodeError("BMP palette index out of range", o);
        if (img.channels == 1) {
          out[0] = palette[index][0];
        } else {
          out[0] = palette[index][0];
          out[1] = palette[index][1];
          out[2] = palette[index][2];
        }
      } else {
        out[0] = bytes[o + 2];
        out[1] = bytes[o + 1];
        out[2] = bytes[o];
        if (bpp == 32) out[3] = bytes[o + 3];
      }
    }
  }
  return img;
}

RawImage decode(std::span<const std::uint8_t> bytes) {
  if (looks_like_png(bytes)) return decode_png(bytes);
  if (looks_like_bmp(bytes)) return decode_bmp(bytes);
  throw DecodeError("unrecognized image signature (expected PNG or BMP)", 0);
}

namespace {

void write_chunk(std::vector<std::uint8_t>& out, const char* type, std::span<const std::uint8_t> data) {
  put_be32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t type_off = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const auto crc = crc32(crc32(0L, Z_NULL, 0), out.data() + type_off,
                         static_cast<uInt>(data.size() + 4));
  put_be32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

std::vector<std::uint8_t> encode_png(const RawImage& img) {
  if (img.width == 0 || img.height == 0) throw ArgumentError("cannot encode an empty image");
  if (img.bit_depth != 8 && img.bit_depth != 16) throw ArgumentError("PNG bit depth must be 8 or 16");
  std::uint8_t color_type = 0;
  switch (img.channels) {
    case 1: color_type = 0; break;
    case 2: color_type = 4; break;
    case 3: color_type = 2; break;
    case 4: color_type = 6; break;
    default: throw ArgumentError("PNG channel count must be 1-4");
  }
  const std::size_t row_samples = static_cast<std::size_t>(img.width) * img.channels;
  if (img.samples.size() != row_samples * img.height) throw ArgumentError("sample count does not match dimensions");

  std::vector<std::uint8_t> raw;
  raw.reserve((row_samples * (img.bit_depth / 8) + 1) * img.height);
  for (std::uint32_t y = 0; y < img.height; ++y) {
    raw.push_back(0);
    for (std::size_t i = 0; i < row_samples; ++i) {
      const std::uint16_t s = img.samples[y * row_samples + i];
      if (img.bit_depth == 16) raw.push_back(static_cast<std::uint8_t>(s >> 8));
      raw.push_back(static_cast<std::uint8_t>(s & 0xFF));
    }
  }
  uLongf dest_len = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> compressed(dest_len);
  if (compress2(compressed.data(), &dest_len, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw Error("zlib compression failed");
  }
  compressed.resize(dest_len);

  std::vector<std::uint8_t> out(kPngSignature.begin(), kPngSignature.end());
  std::vector<std::uint8_t> ihdr;
  put_be32(ihdr, img.width);
  put_be32(ihdr, img.height);
  ihdr.push_back(static_cast<std::uint8_t>(img.bit_depth));
  ihdr.push_back(color_type);
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  write_chunk(out, "IHDR", ihdr);
  write_chunk(out, "IDAT", compressed);
  write_chunk(out, "IEND", {});
  return out;
}

std::vector<std::uint8_t> encode_bmp(const RawImage& img) {
  if (img.bit_depth != 8) throw ArgumentError("BMP encoder writes 8-bit samples only");
  if (img.channels != 1 && img.channels != 3 && img.channels != 4) {
    throw ArgumentError("BMP encoder supports 1, 3, or 4 channels");
  }
  const std::uint16_t bpp = img.channels == 1 ? 8 : static_cast<std::uint16_t>(img.channels * 8);
  const std::size_t bytes_pp = bpp / 8;
  const std::size_t stride = (img.width * bytes_pp + 3) & ~std::size_t{3};
  const std::uint32_t palette_bytes = img.channels == 1 ? 1024 : 0;
  const std::uint32_t data_offset = 54 + palette_bytes;
  const auto file_size = static_cast<std::uint32_t>(data_offset + stride * img.height);

  std::vector<std::uint8_t> out;
  out.reserve(file_size);
  out.push_back('B');
  out.push_back('M');
  put_le32(out, file_size);
  put_le32(out, 0);
  put_le32(out, data_offset);
  put_le32(out, 40);
  put_le32(out, img.width);
  put_le32(out, img.height);
  put_le16(out, 1);
  put_le16(out, bpp);
  put_le32(out, 0);
  put_le32(out, static_cast<std::uint32_t>(stride * img.height));
  put_le32(out, 2835);
  put_le32(out, 2835);
  put_le32(out, img.channels == 1 ? 256 : 0);
  put_le32(out, 0);
  if (img.channels == 1) {
    for (int i = 0; i < 256; ++i) {
      const auto v = static_cast<std::uint8_t>(i);
      out.insert(out.end(), {v, v, v, 0});
    }
  }
  for (std::uint32_t row = 0; row < img.height; ++row) {
    const std::uint32_t y = img.height - 1 - row;
    const std::size_t start = out.size();
    for (std::uint32_t x = 0; x < img.width; ++x) {
      if (img.channels == 1) {
        out.push_back(static_cast<std::uint8_t>(img.at(x, y, 0)));
      } else {
        out.push_back(static_cast<std::uint8_t>(img.at(x, y, 2)));
        out.push_back(static_cast<std::uint8_t>(img.at(x, y, 1)));
        out.push_back(static_cast<std::uint8_t>(img.at(x, y, 0)));
        if (img.channels == 4) out.push_back(static_cast<std::uint8_t>(img.at(x, y, 3)));
      }
    }
    out.resize(start + stride, 0);
  }
  return out;
}

}  // namespace cxrseg::codec
