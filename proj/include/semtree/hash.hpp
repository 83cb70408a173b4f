#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace semtree {

// FNV-1a over arbitrary bytes; used for deterministic mock labels and seeds.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

// Hex-encoded SHA-256 of a file's contents; used for run-manifest hashes.
std::string sha256_file_hex(const std::string& path);

// Hex-encoded SHA-256 of a buffer.
std::string sha256_hex(std::string_view data);

}  // namespace semtree
