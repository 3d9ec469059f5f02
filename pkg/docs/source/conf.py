# Configuration file for the Sphinx documentation builder.
#
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# -- Path setup --------------------------------------------------------------

import os
import sys
sys.path.insert(0, os.path.abspath('../../'))

from spinmechworks import __version__  # noqa: E402

# -- Project information -----------------------------------------------------

project = 'SpinMechWorks SDK'
copyright = '2020, NVIDIA Corportation'
author = 'NVIDIA Corportation'

version = __version__
release = __version__


# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.intersphinx',
    'sphinx.ext.mathjax',
    'sphinx.ext.napoleon',
    'sphinx.ext.viewcode'
]

templates_path = ['_templates']
exclude_patterns = []

# Dataclass fields in declaration order.
autodoc_member_order = 'bysource'

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
    'pandas': ('https://pandas.pydata.org/docs/', None),
}


# -- Options for HTML output -------------------------------------------------

html_theme = 'sphinx_rtd_theme'

html_static_path = []
if os.path.exists('_static'):
    html_static_path.append('_static')


# -- Extension configuration -------------------------------------------------

# Document writer constructors and the validation run after dataclass construction.
def skip(app, what, name, obj, would_skip, options):
    if name in ("__init__", "__post_init__", "__enter__"):
        return False
    return would_skip


def setup(app):
    app.connect("autodoc-skip-member", skip)
