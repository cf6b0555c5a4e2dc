import unittest
import re
from utils.color_utils import generate_color_palette, get_contrast_color

class TestColorUtils(unittest.TestCase):
    def test_palette_keys_and_format(self):
        """Test palette keys and hex format."""
        palette = generate_color_palette(5)
        self.assertEqual(list(palette), [f'class_{c}' for c in range(5)])
        for color in palette.values():
            self.assertRegex(color, re.compile(r'^#[0-9a-f]{6}$'))

    def test_palette_is_deterministic_and_distinct(self):
        """Test that palettes repeat across calls and avoid duplicate colors."""
        self.assertEqual(generate_color_palette(12), generate_color_palette(12))
        self.assertEqual(len(set(generate_color_palette(12).values())), 12)
        self.assertEqual(generate_color_palette(0), {})

    def test_contrast_color(self):
        """Test font color choice on light and dark fills."""
        self.assertEqual(get_contrast_color('#ffffff'), '#000000')
        self.assertEqual(get_contrast_color('#000000'), '#ffffff')
        self.assertEqual(get_contrast_color('1a237e'), '#ffffff')
        for color in generate_color_palette(8).values():
            self.assertEqual(get_contrast_color(color), '#000000')

if __name__ == '__main__':
    unittest.main()
