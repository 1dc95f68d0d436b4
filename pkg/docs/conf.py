# -*- coding: utf-8 -*-
#
# Configuration file for the Sphinx documentation builder.

# -- Path setup --------------------------------------------------------------

import os
import sys
sys.path.insert(0, os.path.abspath('../'))

from kinfront.__version__ import __version__  # noqa: E402


# -- Project information -----------------------------------------------------

project = 'kinfront'
copyright = 'The kinfront developers'
author = 'The kinfront developers'

version = '.'.join(__version__.split('.')[:2])
release = __version__


# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.intersphinx',
    'sphinx.ext.napoleon',
    'sphinx.ext.mathjax',
    'sphinxcontrib.programoutput',
    'sphinx.ext.autosectionlabel',
    'sphinxcontrib.mermaid'
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'
language = 'en'
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']
pygments_style = 'sphinx'

# Google-style sections only
napoleon_numpy_docstring = False


# -- Options for HTML output -------------------------------------------------

html_theme = 'alabaster'
html_theme_options = dict(fixed_sidebar=True,
                          show_related=True,
                          logo_name=True)
html_static_path = []
htmlhelp_basename = 'kinfrontdoc'


# -- Options for manual page output ------------------------------------------

man_pages = [
    (master_doc, 'kinfront', 'kinfront Documentation',
     [author], 1)
]


# -- Extension configuration -------------------------------------------------

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
}

add_module_names = False
