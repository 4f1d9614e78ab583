#pragma once

#include <cstdint>
#include <string>

namespace stefan {

// SHA-256 of a byte buffer or file, hex-encoded. Used for the manifest's
// output inventory so `verify` can refuse tampered or truncated runs.
std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_file_hex(const std::string& path);

}  // namespace stefan
