#include <zlib.h>

#include <string>
#include <vector>

#include "semdrift/common.hpp"
#include "semdrift/metrics.hpp"

namespace semdrift {

std::size_t deflate_size(const std::string& bytes, int level) {
    if (level < 0 || level > 9) {
        throw Error("bad_level", "deflate level must be in [0, 9]");
    }
    uLongf bound = compressBound(static_cast<uLong>(bytes.size()));
    std::vector<Bytef> out(bound);
    const int rc = compress2(out.data(), &bound,
                             reinterpret_cast<const Bytef*>(bytes.data()),
                             static_cast<uLong>(bytes.size()), level);
    if (rc != Z_OK) {
        throw Error("deflate_failed", "compress2 returned " + std::to_string(rc));
    }
    return static_cast<std::size_t>(bound);
}

}  // namespace semdrift
