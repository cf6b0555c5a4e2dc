from typing import Dict
import colorsys

GOLDEN_RATIO_CONJUGATE = 0.618033988749895


def generate_color_palette(num_classes: int) -> Dict[str, str]:
    """Distinct, deterministic fill colors keyed 'class_<c>' for DOT rendering.

    Hues step by the golden ratio so neighboring class indices stay far
    apart on the color wheel however many classes there are.
    """
    colors = {}
    for c in range(num_classes):
        hue = (c * GOLDEN_RATIO_CONJUGATE) % 1.0
        r, g, b = colorsys.hsv_to_rgb(hue, 0.45, 0.95)
        colors[f'class_{c}'] = '#{:02x}{:02x}{:02x}'.format(round(r * 255), round(g * 255), round(b * 255))
    return colors


def get_contrast_color(hex_color: str) -> str:
    """Black or white font color, whichever reads better on the given fill."""
    hex_color = hex_color.lstrip('#')
    r, g, b = (int(hex_color[k:k + 2], 16) for k in (0, 2, 4))
    luminance = (0.299 * r + 0.587 * g + 0.114 * b) / 255
    return '#000000' if luminance > 0.5 else '#ffffff'
