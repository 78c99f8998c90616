/// Malformed responses, one per line of this table.
pub const MALFORMED: [&str; 20] = [
    "slow down please",
    "",
    "   \n\t ",
    "WARNING",
    "WARNING Slow down.",
    "WARNING: Slow down.",
    "DANGER|Stop now.",
    "STOP|Stop now.",
    "|Slow down.",
    "WARN|Slow down.",
    "NONE WARNING|Slow down.",
    "WARNING|",
    "WARNING|   ",
    "ACTUATE|",
    "ACTUATE|\t",
    "NONE|\nWARNING|Slow down.",
    "WARNING|Slow down.\nThen brake.",
    "ACTUATE|Braking.\n\nNONE|",
    "Signal|Message",
    "```\nWARNING|Slow down.\n```",
];
