# Sphinx configuration for the ctrlq documentation.
#
# Build with ``sphinx-build docs/source docs/build`` from an environment where ctrlq is installed.

import ctrlq

project = 'ctrlq'
copyright = '2026, ctrlq'
author = 'ctrlq'
release = ctrlq.__version__
version = '.'.join(release.split('.')[:2])

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
    'sphinx.ext.napoleon',
]

# Docstrings use numpy-style Parameters sections.
#
napoleon_google_docstring = False
napoleon_numpy_docstring = True

autoclass_content = 'both'
autodoc_member_order = 'bysource'
autodoc_typehints = 'description'

# param.Parameterized classes carry many inherited members; show only what ctrlq defines.
#
autodoc_default_options = {
    'inherited-members': False,
    'undoc-members': False,
}

exclude_patterns = ['_build']

html_theme = 'sphinx_rtd_theme'
html_title = f'ctrlq {release}'
