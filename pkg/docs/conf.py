# -*- coding: utf-8 -*-
#
# Configuration file for the Sphinx documentation builder.
#
# http://www.sphinx-doc.org/en/master/config

import os
import sys

# autodoc needs to find our code.
sys.path.insert(0, os.path.abspath("../src"))

# -- Project information -----------------------------------------------------

project = "smallcells"
copyright = "2024, Metric Geometry and Gerrymandering Group"
author = "Metric Geometry and Gerrymandering Group"

version = "0.1"
release = "0.1.0"

# -- General configuration ---------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.coverage",
    "sphinx.ext.mathjax",
    "sphinx.ext.viewcode",
    "sphinx.ext.intersphinx",
    "sphinx.ext.napoleon",
    "sphinx_copybutton",
    "sphinx.ext.autosectionlabel",
    "recommonmark",
]

intersphinx_mapping = {
    "numpy": ("https://numpy.org/doc/stable/", None),
    "scipy": ("https://docs.scipy.org/doc/scipy/", None),
}

templates_path = ["_templates"]

source_suffix = {
    ".rst": "restructuredtext",
    ".md": "markdown",
}

master_doc = "index"

language = "en"

exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]

pygments_style = "sphinx"


# -- Options for HTML output -------------------------------------------------

html_theme = "sphinx_rtd_theme"

html_theme_options = {"style_nav_header_background": "#0099cd"}

html_static_path = []


# -- Options for HTMLHelp output ---------------------------------------------

htmlhelp_basename = "smallcellsdoc"


# -- Options for manual page output ------------------------------------------

man_pages = [(master_doc, "smallcells", "smallcells Documentation", [author], 1)]


# -- Options for Texinfo output ----------------------------------------------

texinfo_documents = [
    (
        master_doc,
        "smallcells",
        "smallcells Documentation",
        author,
        "smallcells",
        "Small cells of Poisson hyperplane tessellations.",
        "Miscellaneous",
    )
]

# Autodoc config.

# Append the __init__ string of a class to the class docstring.
autoclass_content = "both"

autodoc_default_flags = ["members"]

# -- Extension configuration -------------------------------------------------

# Prepend the module name of classes.
add_module_names = True
autodoc_inherit_docstrings = False
autosectionlabel_prefix_document = True

suppress_warnings = [
    "autosectionlabel.*"
]  # removes warnings about repeated section headers
