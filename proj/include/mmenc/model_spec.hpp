#pragma once

#include <string>
#include <string_view>

namespace mmenc {

enum class ModalityClass
{
    MultimodalTrained,
    MultimodalArchitectural,
    UnimodalLanguage,
    UnimodalVision,
    LinearIntegration
};

std::string_view to_string(ModalityClass c);
ModalityClass parse_modality_class(std::string_view s);

/// Classes that count as multimodal for the weak and strict tests.
constexpr bool counts_as_multimodal(ModalityClass c)
{
    return c == ModalityClass::MultimodalTrained || c == ModalityClass::MultimodalArchitectural ||
           c == ModalityClass::LinearIntegration;
}

/// Classes that integrate modalities beyond linear combination.
constexpr bool integrates_nonlinearly(ModalityClass c)
{
    return c == ModalityClass::MultimodalTrained || c == ModalityClass::MultimodalArchitectural;
}

/// A candidate network. Suppliers must already have relabelled randomly
/// initialised contrastive models as unimodal.
struct ModelSpec
{
    std::string model_id;
    ModalityClass modality = ModalityClass::UnimodalVision;
    bool trained = true;
};

}  // namespace mmenc
