#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fbp::cli {

/// Lowercase hex SHA-256 of a byte string or of a file's contents.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Collects the outputs of one run: the JSONL iterate log, every file the
/// run writes, and the manifest that lists them with checksums.
class RunRecorder {
public:
    static constexpr int kManifestVersion = 1;

    RunRecorder(std::filesystem::path output_dir, std::string subcommand);

    /// Absolute path for a named output; the file is listed in the manifest.
    std::filesystem::path output(const std::string& name);
    /// Appends one line to log.jsonl.
    void log(const nlohmann::json& record);
    double elapsed_seconds() const;

    /// Writes manifest.json from `body` plus outputs, checksums and wall time.
    /// Returns its path.
    std::filesystem::path write_manifest(nlohmann::json body);

private:
    std::filesystem::path dir_;
    std::string subcommand_;
    std::vector<std::string> outputs_;
    std::ofstream log_;
    std::size_t log_lines_ = 0;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace fbp::cli
