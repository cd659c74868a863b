// Copyright 2026 The Neuromorphic Federated Learning Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nfl/bytes.h"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <iterator>

#include "nfl/error.h"

namespace nfl {

std::uint64_t ByteReader::Le(int n) {
  if (remaining() < static_cast<std::size_t>(n)) {
    throw Error(ErrorCode::kUnexpectedEnd, "unexpected end of data");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) {
    v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
  }
  pos_ += n;
  return v;
}

std::span<const std::uint8_t> ByteReader::Raw(std::size_t n) {
  if (remaining() < n) {
    throw Error(ErrorCode::kUnexpectedEnd, "unexpected end of data");
  }
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

bool ByteReader::Expect(std::string_view magic) {
  const auto got = Raw(magic.size());
  return std::equal(got.begin(), got.end(), magic.begin(),
                    [](std::uint8_t a, char b) {
                      return a == static_cast<std::uint8_t>(b);
                    });
}

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::uint32_t Crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const auto n = static_cast<uInt>(
        std::min<std::size_t>(bytes.size() - pos, 1u << 30));
    crc = crc32(crc, bytes.data() + pos, n);
    pos += n;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace nfl
