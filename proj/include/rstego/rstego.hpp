#pragma once

#include "rstego/bmp4.hpp"
#include "rstego/color_grey.hpp"
#include "rstego/payload.hpp"
#include "rstego/reference_image.hpp"
#include "rstego/stego.hpp"
#include "rstego/transport.hpp"
