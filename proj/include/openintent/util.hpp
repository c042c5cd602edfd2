#pragma once

#include <charconv>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace openintent {

// Shortest round-trip decimal representation, independent of the C locale.
inline std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{}) throw std::runtime_error("fmt_double: conversion failed");
    return std::string(buf, res.ptr);
}

inline void ensure_dir(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw std::runtime_error("cannot create directory " + path + ": " + ec.message());
}

}  // namespace openintent
