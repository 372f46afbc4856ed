#include "scenex/labelmap.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <png.h>

namespace scenex {

namespace {

constexpr std::size_t kMaxPixels = 1u << 28;  // dimension overflow guard

void check_dims(long long w, long long h, std::size_t channels) {
    if (w < 1 || h < 1) throw ValidationError("image dimensions must be positive");
    if (static_cast<unsigned long long>(w) * static_cast<unsigned long long>(h) * channels > kMaxPixels)
        throw ValidationError("image dimensions overflow sanity limit");
}

}  // namespace

RgbImage RgbImage::filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    check_dims(w, h, 3);
    RgbImage img;
    img.width = w;
    img.height = h;
    img.pixels.resize(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
        img.pixels[i] = r;
        img.pixels[i + 1] = g;
        img.pixels[i + 2] = b;
    }
    return img;
}

void RgbImage::set(int x, int y, std::uint8_t rr, std::uint8_t gg, std::uint8_t bb) {
    std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
    pixels[i] = rr;
    pixels[i + 1] = gg;
    pixels[i + 2] = bb;
}

void RgbImage::validate() const {
    check_dims(width, height, 3);
    if (pixels.size() != static_cast<std::size_t>(width) * height * 3)
        throw ValidationError("RGB pixel buffer length must be width*height*3");
}

GrayImage GrayImage::filled(int w, int h, std::uint8_t v) {
    check_dims(w, h, 1);
    GrayImage img;
    img.width = w;
    img.height = h;
    img.pixels.assign(static_cast<std::size_t>(w) * h, v);
    return img;
}

void GrayImage::validate() const {
    check_dims(width, height, 1);
    if (pixels.size() != static_cast<std::size_t>(width) * height)
        throw ValidationError("gray pixel buffer length must be width*height");
}

ClassTaxonomy::ClassTaxonomy(std::vector<TaxonomyEntry> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw ValidationError("taxonomy must have at least one class");
    int prev_gray = -1;
    for (int i = 0; i < static_cast<int>(entries_.size()); ++i) {
        const TaxonomyEntry& e = entries_[static_cast<std::size_t>(i)];
        if (e.id != i) throw ValidationError("taxonomy class ids must be contiguous from 0");
        if (e.gray < 0 || e.gray > 255) throw ValidationError("taxonomy gray value out of [0,255]");
        if (e.gray <= prev_gray)
            throw ValidationError("taxonomy gray values must be strictly increasing with class id");
        prev_gray = e.gray;
    }
}

const ClassTaxonomy& ClassTaxonomy::defaults() {
    // Class dictionary: Background plus 22 traffic classes. Named ids
    // (Barrier=1, Sign=5, Car=7, nmt=8, infra=10, Road line=12, Tree=15,
    // road=18, pole=22) are fixed; the gaps carry the Cityscapes-adjacent
    // classes. Gray gradient is floor(255*id/22).
    auto build = [] {
        std::vector<std::pair<std::string, bool>> defs = {
            {"Background", false},  // 0: void, ground
            {"Barrier", true},      // 1: obstacles between vehicle and pedestrian
            {"Building", false},    // 2
            {"Sky", false},         // 3
            {"Zebra line", true},   // 4: crosswalk marking
            {"Sign", true},         // 5: traffic signals
            {"Pedestrian", true},   // 6
            {"Car", true},          // 7: all kinds of vehicles
            {"nmt", true},          // 8: non-motorized vehicles
            {"Guardrail", true},    // 9
            {"infra", true},        // 10: road infrastructure
            {"Sidewalk", false},    // 11
            {"Road line", true},    // 12: road line signal
            {"Tunnel wall", false}, // 13
            {"Wall", false},        // 14
            {"Tree", false},        // 15: woods and bushes
            {"Terrain", false},     // 16
            {"Fence", false},       // 17
            {"road", true},         // 18: traffic road and pedestrian road
            {"Bridge", false},      // 19
            {"Cone", true},         // 20
            {"Curb", false},        // 21
            {"pole", false},        // 22: light pole
        };
        std::vector<TaxonomyEntry> entries;
        entries.reserve(defs.size());
        int last = static_cast<int>(defs.size()) - 1;
        for (int id = 0; id <= last; ++id) {
            TaxonomyEntry e;
            e.id = id;
            e.name = defs[static_cast<std::size_t>(id)].first;
            e.gray = 255 * id / last;
            e.critical = defs[static_cast<std::size_t>(id)].second;
            entries.push_back(std::move(e));
        }
        return ClassTaxonomy(std::move(entries));
    };
    static const ClassTaxonomy tax = build();
    return tax;
}

ClassTaxonomy ClassTaxonomy::from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ValidationError("taxonomy JSON must be an array");
    std::vector<TaxonomyEntry> entries;
    for (const auto& item : j) {
        TaxonomyEntry e;
        e.id = item.at("id").get<int>();
        e.name = item.at("name").get<std::string>();
        e.gray = item.at("gray").get<int>();
        e.critical = item.at("critical").get<bool>();
        entries.push_back(std::move(e));
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return ClassTaxonomy(std::move(entries));
}

nlohmann::json ClassTaxonomy::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const TaxonomyEntry& e : entries_)
        j.push_back({{"id", e.id}, {"name", e.name}, {"gray", e.gray}, {"critical", e.critical}});
    return j;
}

ClassTaxonomy ClassTaxonomy::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open taxonomy file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed taxonomy JSON in " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

const TaxonomyEntry& ClassTaxonomy::entry(int id) const {
    if (!has(id)) throw ValidationError("unknown class id " + std::to_string(id));
    return entries_[static_cast<std::size_t>(id)];
}

std::optional<int> ClassTaxonomy::find_by_name(const std::string& name) const {
    for (const TaxonomyEntry& e : entries_)
        if (e.name == name) return e.id;
    return std::nullopt;
}

int ClassTaxonomy::class_for_gray(int gray) const {
    int best = 0;
    int best_dist = std::abs(gray - entries_[0].gray);
    for (int id = 1; id < size(); ++id) {
        int dist = std::abs(gray - entries_[static_cast<std::size_t>(id)].gray);
        if (dist < best_dist) {
            best = id;
            best_dist = dist;
        }
    }
    return best;
}

LabelMap LabelMap::filled(int w, int h, std::uint8_t cls) {
    check_dims(w, h, 1);
    LabelMap m;
    m.width = w;
    m.height = h;
    m.cells.assign(static_cast<std::size_t>(w) * h, cls);
    return m;
}

void LabelMap::validate() const {
    check_dims(width, height, 1);
    if (cells.size() != static_cast<std::size_t>(width) * height)
        throw ValidationError("label map cell buffer length must be width*height");
}

void LabelMap::validate_against(const ClassTaxonomy& tax) const {
    validate();
    for (std::uint8_t c : cells)
        if (!tax.has(c))
            throw ValidationError("label map contains class id " + std::to_string(int(c)) +
                                  " not present in the taxonomy");
}

double gray_value(std::uint8_t r, std::uint8_t g, std::uint8_t b, GrayMode mode) {
    static const double denom = 1.0 + std::pow(1.5, 2.2) + std::pow(0.6, 2.2);
    double num = std::pow(double(r), 2.2) + std::pow(1.5 * double(g), 2.2) + std::pow(0.6 * double(b), 2.2);
    double ratio = num / denom;
    if (mode == GrayMode::normalized) return std::pow(ratio, 1.0 / 2.2);
    return std::min(std::sqrt(ratio), 255.0);
}

GrayImage rgb_to_gray(const RgbImage& img, GrayMode mode) {
    img.validate();
    GrayImage out;
    out.width = img.width;
    out.height = img.height;
    out.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
        double v = gray_value(img.pixels[3 * i], img.pixels[3 * i + 1], img.pixels[3 * i + 2], mode);
        out.pixels[i] = static_cast<std::uint8_t>(std::lround(v));  // half away from zero
    }
    return out;
}

LabelMap gray_to_labelmap(const GrayImage& img, const ClassTaxonomy& tax) {
    img.validate();
    // 256-entry lookup; nearest gray with ties to the lower class id.
    std::array<std::uint8_t, 256> lut{};
    for (int v = 0; v < 256; ++v) lut[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(tax.class_for_gray(v));
    LabelMap out;
    out.width = img.width;
    out.height = img.height;
    out.cells.resize(img.pixels.size());
    for (std::size_t i = 0; i < img.pixels.size(); ++i) out.cells[i] = lut[img.pixels[i]];
    return out;
}

GrayImage labelmap_to_gray(const LabelMap& map, const ClassTaxonomy& tax) {
    map.validate_against(tax);
    GrayImage out;
    out.width = map.width;
    out.height = map.height;
    out.pixels.resize(map.cells.size());
    for (std::size_t i = 0; i < map.cells.size(); ++i)
        out.pixels[i] = static_cast<std::uint8_t>(tax.entry(map.cells[i]).gray);
    return out;
}

ClassMigrationMap ClassMigrationMap::identity(const ClassTaxonomy& tax) {
    ClassMigrationMap m;
    for (const TaxonomyEntry& e : tax.entries()) m.set(e.id, e.id);
    return m;
}

ClassMigrationMap ClassMigrationMap::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("migration rules JSON must be an object");
    ClassMigrationMap m;
    for (auto it = j.begin(); it != j.end(); ++it) {
        int source = 0;
        try {
            source = std::stoi(it.key());
        } catch (const std::exception&) {
            throw ValidationError("migration rule key is not a class id: '" + it.key() + "'");
        }
        if (it.value().is_string()) {
            if (it.value().get<std::string>() != "drop")
                throw ValidationError("migration rule value must be a class id or \"drop\"");
            m.set_drop(source);
        } else if (it.value().is_number_integer()) {
            m.set(source, it.value().get<int>());
        } else {
            throw ValidationError("migration rule value must be a class id or \"drop\"");
        }
    }
    return m;
}

nlohmann::json ClassMigrationMap::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [source, target] : rules_) {
        if (target == kDrop)
            j[std::to_string(source)] = "drop";
        else
            j[std::to_string(source)] = target;
    }
    return j;
}

ClassMigrationMap ClassMigrationMap::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open migration rules file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed migration JSON in " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

int ClassMigrationMap::target_for(int source) const {
    auto it = rules_.find(source);
    if (it == rules_.end())
        throw ValidationError("no migration rule for class " + std::to_string(source));
    return it->second;
}

LabelMap migrate(const LabelMap& map, const ClassMigrationMap& rules, const ClassTaxonomy& target) {
    map.validate();
    std::array<int, 256> lut;
    lut.fill(-2);  // -2 = not resolved yet
    LabelMap out;
    out.width = map.width;
    out.height = map.height;
    out.cells.resize(map.cells.size());
    for (std::size_t i = 0; i < map.cells.size(); ++i) {
        int src = map.cells[i];
        int& t = lut[static_cast<std::size_t>(src)];
        if (t == -2) t = rules.target_for(src);
        int resolved = (t == ClassMigrationMap::kDrop) ? 0 : t;
        if (!target.has(resolved))
            throw ValidationError("migration target class " + std::to_string(resolved) +
                                  " is not in the target taxonomy");
        out.cells[i] = static_cast<std::uint8_t>(resolved);
    }
    return out;
}

std::vector<std::int64_t> class_histogram(const LabelMap& map, int k) {
    if (k < 1) throw ValidationError("histogram needs k >= 1");
    std::vector<std::int64_t> hist(static_cast<std::size_t>(k), 0);
    for (std::uint8_t c : map.cells) {
        if (c >= k) throw ValidationError("class id " + std::to_string(int(c)) + " out of range for k=" + std::to_string(k));
        ++hist[c];
    }
    return hist;
}

// ---------------------------------------------------------------------------
// PNM + PNG I/O

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string pnm_token(std::istream& in, const std::filesystem::path& path) {
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    if (c == EOF) throw IoError("truncated PNM header in " + path.string());
    std::string tok;
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok;
}

int pnm_int(std::istream& in, const std::filesystem::path& path) {
    std::string tok = pnm_token(in, path);
    try {
        std::size_t pos = 0;
        int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw IoError("malformed PNM header value '" + tok + "' in " + path.string());
    }
}

struct PnmHeader {
    int width = 0;
    int height = 0;
    int maxval = 0;
};

PnmHeader read_pnm_header(std::istream& in, const char* magic, const std::filesystem::path& path) {
    std::string m = pnm_token(in, path);
    if (m != magic)
        throw IoError("bad magic '" + m + "' in " + path.string() + " (expected " + magic + ")");
    PnmHeader h;
    h.width = pnm_int(in, path);
    h.height = pnm_int(in, path);
    h.maxval = pnm_int(in, path);
    check_dims(h.width, h.height, 1);
    if (h.maxval < 1 || h.maxval > 255)
        throw IoError("unsupported PNM maxval " + std::to_string(h.maxval) + " in " + path.string());
    // The single whitespace byte after maxval was consumed by pnm_int.
    return h;
}

std::vector<std::uint8_t> read_raw(std::istream& in, std::size_t n, const std::filesystem::path& path) {
    std::vector<std::uint8_t> buf(n);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        throw IoError("truncated PNM payload in " + path.string());
    return buf;
}

bool has_png_magic(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    unsigned char sig[8] = {0};
    in.read(reinterpret_cast<char*>(sig), 8);
    return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

GrayImage load_png_gray(const std::filesystem::path& path) {
    PngReader r;
    r.fp = std::fopen(path.c_str(), "rb");
    if (!r.fp) throw IoError("cannot open file: " + path.string());
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!r.png) throw IoError("libpng init failed");
    r.info = png_create_info_struct(r.png);
    if (!r.info) throw IoError("libpng init failed");
    if (setjmp(png_jmpbuf(r.png))) throw IoError("malformed PNG file: " + path.string());
    png_init_io(r.png, r.fp);
    png_read_info(r.png, r.info);

    png_uint_32 w = png_get_image_width(r.png, r.info);
    png_uint_32 h = png_get_image_height(r.png, r.info);
    int depth = png_get_bit_depth(r.png, r.info);
    int color = png_get_color_type(r.png, r.info);
    if (color != PNG_COLOR_TYPE_GRAY || depth != 8)
        throw IoError("only 8-bit grayscale PNG is accepted: " + path.string());
    check_dims(w, h, 1);

    GrayImage img;
    img.width = static_cast<int>(w);
    img.height = static_cast<int>(h);
    img.pixels.resize(static_cast<std::size_t>(w) * h);
    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = img.pixels.data() + static_cast<std::size_t>(y) * w;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);
    return img;
}

GrayImage load_gray_any(const std::filesystem::path& path) {
    if (has_png_magic(path)) return load_png_gray(path);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    PnmHeader h = read_pnm_header(in, "P5", path);
    GrayImage img;
    img.width = h.width;
    img.height = h.height;
    img.pixels = read_raw(in, static_cast<std::size_t>(h.width) * h.height, path);
    return img;
}

}  // namespace

LabelMap load_labelmap(const std::filesystem::path& path) {
    GrayImage raw = load_gray_any(path);
    LabelMap map;
    map.width = raw.width;
    map.height = raw.height;
    map.cells = std::move(raw.pixels);
    return map;
}

void save_labelmap(const LabelMap& map, const std::filesystem::path& path) {
    map.validate();
    GrayImage img;
    img.width = map.width;
    img.height = map.height;
    img.pixels = map.cells;
    save_gray_image(img, path);
}

GrayImage load_gray_image(const std::filesystem::path& path) { return load_gray_any(path); }

void save_gray_image(const GrayImage& img, const std::filesystem::path& path) {
    img.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path.string());
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

RgbImage load_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    PnmHeader h = read_pnm_header(in, "P6", path);
    RgbImage img;
    img.width = h.width;
    img.height = h.height;
    img.pixels = read_raw(in, static_cast<std::size_t>(h.width) * h.height * 3, path);
    return img;
}

void save_ppm(const RgbImage& img, const std::filesystem::path& path) {
    img.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path.string());
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace scenex
