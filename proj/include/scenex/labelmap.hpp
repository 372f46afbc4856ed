#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenex/common.hpp"

namespace scenex {

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major RGB triples

    static RgbImage filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b);

    std::uint8_t r(int x, int y) const { return pixels[3 * (static_cast<std::size_t>(y) * width + x)]; }
    std::uint8_t g(int x, int y) const { return pixels[3 * (static_cast<std::size_t>(y) * width + x) + 1]; }
    std::uint8_t b(int x, int y) const { return pixels[3 * (static_cast<std::size_t>(y) * width + x) + 2]; }
    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
    void validate() const;
};

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major intensities

    static GrayImage filled(int w, int h, std::uint8_t v);
    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    void set(int x, int y, std::uint8_t v) { pixels[static_cast<std::size_t>(y) * width + x] = v; }
    void validate() const;
};

struct TaxonomyEntry {
    int id = 0;
    std::string name;
    int gray = 0;  // 0..255, strictly increasing with id
    bool critical = false;
};

// Class dictionary. IDs are unique and contiguous from 0; gray values form a
// strictly increasing gradient so classes stay separable in gray exports.
class ClassTaxonomy {
public:
    explicit ClassTaxonomy(std::vector<TaxonomyEntry> entries);

    // Background plus the 22 traffic classes, gray gradient floor(255*id/22).
    static const ClassTaxonomy& defaults();

    static ClassTaxonomy from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    static ClassTaxonomy load(const std::filesystem::path& path);

    int size() const { return static_cast<int>(entries_.size()); }
    bool has(int id) const { return id >= 0 && id < size(); }
    const TaxonomyEntry& entry(int id) const;
    const std::vector<TaxonomyEntry>& entries() const { return entries_; }
    std::optional<int> find_by_name(const std::string& name) const;

    // Nearest gray value wins; exact ties resolve to the lower class id.
    int class_for_gray(int gray) const;

private:
    std::vector<TaxonomyEntry> entries_;
};

struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> cells;  // row-major class ids

    static LabelMap filled(int w, int h, std::uint8_t cls);
    std::uint8_t at(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x]; }
    void set(int x, int y, std::uint8_t cls) { cells[static_cast<std::size_t>(y) * width + x] = cls; }
    void validate() const;
    void validate_against(const ClassTaxonomy& tax) const;
    bool operator==(const LabelMap&) const = default;
};

enum class GrayMode {
    normalized,  // exponent 1/2.2, keeps achromatic input fixed and output in range
    literal,     // the plain square root, clamped to 255
};

// Per-pixel gray transform before rounding.
double gray_value(std::uint8_t r, std::uint8_t g, std::uint8_t b, GrayMode mode);

GrayImage rgb_to_gray(const RgbImage& img, GrayMode mode = GrayMode::normalized);
LabelMap gray_to_labelmap(const GrayImage& img, const ClassTaxonomy& tax);
GrayImage labelmap_to_gray(const LabelMap& map, const ClassTaxonomy& tax);

// Source-class rewrite rules: each source id maps to a target id or DROP.
class ClassMigrationMap {
public:
    static constexpr int kDrop = -1;

    ClassMigrationMap() = default;
    static ClassMigrationMap identity(const ClassTaxonomy& tax);
    static ClassMigrationMap from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    static ClassMigrationMap load(const std::filesystem::path& path);

    void set(int source, int target) { rules_[source] = target; }
    void set_drop(int source) { rules_[source] = kDrop; }
    bool covers(int source) const { return rules_.count(source) != 0; }
    // Throws naming the class when no rule exists.
    int target_for(int source) const;
    const std::map<int, int>& rules() const { return rules_; }

private:
    std::map<int, int> rules_;
};

// Rewrites every cell. Dropped classes become Background (0) so the frame
// geometry survives. The result validates against the target taxonomy.
LabelMap migrate(const LabelMap& map, const ClassMigrationMap& rules, const ClassTaxonomy& target);

std::vector<std::int64_t> class_histogram(const LabelMap& map, int k);

// Label-map container is binary PGM (P5, maxval 255, cells stored as raw class
// ids). Loading also accepts 8-bit grayscale PNG.
LabelMap load_labelmap(const std::filesystem::path& path);
void save_labelmap(const LabelMap& map, const std::filesystem::path& path);

GrayImage load_gray_image(const std::filesystem::path& path);
void save_gray_image(const GrayImage& img, const std::filesystem::path& path);

// RGB frames travel as binary PPM (P6).
RgbImage load_ppm(const std::filesystem::path& path);
void save_ppm(const RgbImage& img, const std::filesystem::path& path);

}  // namespace scenex
