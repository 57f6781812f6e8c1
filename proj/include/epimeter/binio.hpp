#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "epimeter/error.hpp"

namespace epimeter::binio {

inline void put_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void get_bytes(std::istream& is, void* p, std::size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n)
    throw IoError("unexpected end of stream");
}

template <class T>
void put_le(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i)
    b[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff);
  put_bytes(os, b, sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  unsigned char b[sizeof(T)];
  get_bytes(is, b, sizeof(T));
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return static_cast<T>(v);
}

inline void put_double(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  put_le<std::uint64_t>(os, u);
}

inline double get_double(std::istream& is) {
  std::uint64_t u = get_le<std::uint64_t>(is);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

inline void put_string(std::ostream& os, const std::string& s) {
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  put_bytes(os, s.data(), s.size());
}

inline std::string get_string(std::istream& is) {
  std::uint32_t n = get_le<std::uint32_t>(is);
  std::string s(n, '\0');
  if (n) get_bytes(is, s.data(), n);
  return s;
}

}  // namespace epimeter::binio
