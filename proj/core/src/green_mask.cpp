#include "wmlab/green_mask.hpp"

#include <fstream>
#include <stdexcept>

namespace wmlab {

GreenMask GreenMask::from_green_ids(std::uint32_t size, const std::vector<TokenId>& ids) {
    GreenMask mask(size);
    for (TokenId id : ids) {
        if (id >= size) throw std::out_of_range("green mask: id out of range");
        mask.set_green(id);
    }
    return mask;
}

std::vector<TokenId> GreenMask::green_ids() const {
    std::vector<TokenId> ids;
    ids.reserve(green_count_);
    for (TokenId v = 0; v < size_; ++v) {
        if (is_green(v)) ids.push_back(v);
    }
    return ids;
}

void GreenMask::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("green mask: cannot open for write: " + path);
    for (TokenId id : green_ids()) out << id << '\n';
    if (!out) throw std::runtime_error("green mask: write failed: " + path);
}

GreenMask GreenMask::load(const std::string& path, std::uint32_t size) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("green mask: cannot open: " + path);
    GreenMask mask(size);
    std::uint64_t id;
    while (in >> id) {
        if (id >= size) throw std::runtime_error("green mask: id out of range in " + path);
        mask.set_green(static_cast<TokenId>(id));
    }
    return mask;
}

}  // namespace wmlab
