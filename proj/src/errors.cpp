#include "symscene/errors.hpp"

#include <nlohmann/json.hpp>

namespace symscene {

std::string Error::to_json() const {
    nlohmann::ordered_json j;
    j["error"] = kind_;
    j["message"] = what();
    if (!location_.empty()) {
        j["location"] = location_;
    }
    if (const auto* t = dynamic_cast<const TransportError*>(this)) {
        j["status"] = t->status();
        j["body"] = t->body();
    }
    return j.dump();
}

}  // namespace symscene
