#include "manifest.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include <openssl/evp.h>

namespace fbp::cli {

namespace {

struct DigestContext {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), &EVP_MD_CTX_free};

    DigestContext() {
        if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
            throw std::runtime_error("sha256: digest init failed");
    }
    void update(const char* data, std::size_t n) {
        if (EVP_DigestUpdate(ctx.get(), data, n) != 1) throw std::runtime_error("sha256: digest update failed");
    }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1)
            throw std::runtime_error("sha256: digest final failed");
        std::string out;
        char byte[3];
        for (unsigned int i = 0; i < len; ++i) {
            std::snprintf(byte, sizeof byte, "%02x", md[i]);
            out += byte;
        }
        return out;
    }
};

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    DigestContext d;
    d.update(bytes.data(), bytes.size());
    return d.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("sha256: cannot open " + path.string());
    DigestContext d;
    std::array<char, 1 << 16> buf;
    while (in) {
        in.read(buf.data(), buf.size());
        d.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return d.hex();
}

RunRecorder::RunRecorder(std::filesystem::path output_dir, std::string subcommand)
    : dir_(std::move(output_dir)), subcommand_(std::move(subcommand)), start_(std::chrono::steady_clock::now()) {
    std::filesystem::create_directories(dir_);
    log_.open(output("log.jsonl"));
    if (!log_) throw std::runtime_error("cannot open " + (dir_ / "log.jsonl").string());
}

std::filesystem::path RunRecorder::output(const std::string& name) {
    if (std::find(outputs_.begin(), outputs_.end(), name) == outputs_.end()) outputs_.push_back(name);
    return dir_ / name;
}

void RunRecorder::log(const nlohmann::json& record) {
    log_ << record.dump() << '\n';
    ++log_lines_;
}

double RunRecorder::elapsed_seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

std::filesystem::path RunRecorder::write_manifest(nlohmann::json body) {
    log_.flush();
    body["schema"] = "fbp-run-manifest";
    body["schema_version"] = kManifestVersion;
    body["subcommand"] = subcommand_;
    body["log_lines"] = log_lines_;
    body["wall_time_seconds"] = elapsed_seconds();
    nlohmann::json files = nlohmann::json::array();
    for (const std::string& name : outputs_) {
        const std::filesystem::path p = dir_ / name;
        files.push_back({{"path", name}, {"bytes", std::filesystem::file_size(p)}, {"sha256", sha256_file(p)}});
    }
    body["outputs"] = files;
    const std::filesystem::path path = dir_ / "manifest.json";
    std::ofstream out(path);
    out << body.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return path;
}

}  // namespace fbp::cli
