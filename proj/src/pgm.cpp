#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>

#include "ocular/imgcore.hpp"

namespace ocular {

namespace {

// Skips whitespace and '#' comments between header tokens.
void skip_separators(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string discard;
      std::getline(in, discard);
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

int read_header_int(std::istream& in, const char* what) {
  skip_separators(in);
  int v = 0;
  int digits = 0;
  while (std::isdigit(in.peek())) {
    v = v * 10 + (in.get() - '0');
    if (++digits > 9) throw Error(ErrorCode::format, std::string("PGM ") + what + " too large");
  }
  if (digits == 0) throw Error(ErrorCode::format, std::string("PGM header: missing ") + what);
  return v;
}

}  // namespace

GrayImage read_pgm(std::istream& in) {
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') throw Error(ErrorCode::format, "not a binary PGM (P5)");
  const int w = read_header_int(in, "width");
  const int h = read_header_int(in, "height");
  const int maxval = read_header_int(in, "maxval");
  if (w < 1 || h < 1) throw Error(ErrorCode::format, "PGM dimensions must be positive");
  if (maxval > 255) throw Error(ErrorCode::format, "16-bit PGM is not supported");
  if (maxval != 255) throw Error(ErrorCode::format, "PGM maxval must be 255");
  const int sep = in.get();
  if (sep == EOF || !std::isspace(sep)) throw Error(ErrorCode::format, "PGM header: expected whitespace after maxval");
  std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (in.gcount() != static_cast<std::streamsize>(data.size()))
    throw Error(ErrorCode::format, "PGM pixel data truncated");
  return GrayImage(w, h, std::move(data));
}

GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  return read_pgm(in);
}

void write_pgm(std::ostream& out, const GrayImage& img) {
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels().data()),
            static_cast<std::streamsize>(img.size()));
}

void write_pgm(const std::string& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  write_pgm(out, img);
  if (!out) throw Error(ErrorCode::io, "write failed for " + path);
}

}  // namespace ocular
