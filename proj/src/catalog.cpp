#include "radiomx/catalog.hpp"

#include "radiomx/first_order.hpp"
#include "radiomx/shape.hpp"
#include "radiomx/texture.hpp"
#include "radiomx/wavelet.hpp"

namespace radiomx {

std::string_view class_name(FeatureClass c) {
    switch (c) {
        case FeatureClass::Shape: return "shape";
        case FeatureClass::FirstOrder: return "firstorder";
        case FeatureClass::Glcm: return "glcm";
        case FeatureClass::Glrlm: return "glrlm";
        case FeatureClass::Glszm: return "glszm";
        case FeatureClass::Gldm: return "gldm";
        case FeatureClass::Ngtdm: return "ngtdm";
    }
    return "unknown";
}

std::string FeatureDescriptor::full_name() const {
    return filter + "_" + std::string(class_name(cls)) + "_" + name;
}

namespace {

template <std::size_t N>
void add(std::vector<FeatureDescriptor>& out, const std::string& filter, FeatureClass cls,
         const std::array<std::string_view, N>& names) {
    for (auto n : names) out.push_back({filter, cls, std::string(n)});
}

void add_intensity_classes(std::vector<FeatureDescriptor>& out, const std::string& filter) {
    add(out, filter, FeatureClass::FirstOrder, kFirstOrderNames);
    add(out, filter, FeatureClass::Glcm, kGlcmNames);
    add(out, filter, FeatureClass::Glrlm, kGlrlmNames);
    add(out, filter, FeatureClass::Glszm, kGlszmNames);
    add(out, filter, FeatureClass::Gldm, kGldmNames);
    add(out, filter, FeatureClass::Ngtdm, kNgtdmNames);
}

}  // namespace

const std::vector<FeatureDescriptor>& catalog() {
    static const auto cat = [] {
        std::vector<FeatureDescriptor> out;
        add(out, "original", FeatureClass::Shape, kShapeNames);
        add_intensity_classes(out, "original");
        for (const char* band : kBandLabels) add_intensity_classes(out, band);
        return out;
    }();
    return cat;
}

const std::vector<std::string>& feature_names() {
    static const auto names = [] {
        std::vector<std::string> out;
        for (const auto& d : catalog()) out.push_back(d.full_name());
        return out;
    }();
    return names;
}

}  // namespace radiomx
