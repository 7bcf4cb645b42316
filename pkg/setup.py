from setuptools import find_packages, setup

setup(
    name="bb84-security-analysis",
    version="0.1.0",
    description="BB84 / used-bits-BB84 security simulator and analyzer",
    packages=find_packages(exclude=["tests", "tests.*"]),
    python_requires=">=3.9",
    install_requires=[
        "numpy",
        "scipy",
        "pandas",
        "python-dotenv",
    ],
    extras_require={"test": ["pytest"]},
    entry_points={"console_scripts": ["qkd-security=qkd_security.pipelines.cli:main"]},
)
